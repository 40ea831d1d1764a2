//! Per-turn orchestration: extract, hard-block, record, score, and, once
//! the threshold is crossed, rewrite the full history before anything is
//! sent upstream. The upstream model is untrusted: only sanitized text
//! crosses this boundary, and everything that does cross is captured in an
//! append-only transcript for leak checks and exposure metrics.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entities::{DetectionSpan, EntityType};
use crate::extractor::RecognizerSet;
use crate::pseudonym::{rewrite_text, PseudonymError, PseudonymMap, BLOCKED_PLACEHOLDER};
use crate::registry::{RegistryError, RegistrySnapshot, SessionRegistry};
use crate::risk::{cpe_score, CooccurrenceGraph, CpeTrace, GraphExport, RiskConfig};
use crate::textscan::{contains_value, replace_all, Substitution};
use crate::Score;

#[derive(Debug, Error)]
pub enum UpstreamError {
    #[error("upstream request failed: {0}")]
    Request(String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Upstream(#[from] UpstreamError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Pseudonym(#[from] PseudonymError),
    #[error("no turn to dispatch")]
    NothingToSend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

/// One entry of the context window sent upstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextMessage {
    pub role: Role,
    pub content: String,
}

/// The boundary to the external model. Implementations must be usable from
/// multiple sessions concurrently.
pub trait UpstreamClient: Send + Sync {
    fn complete(&self, context: &[ContextMessage]) -> Result<String, UpstreamError>;
}

/// Scripted mock: returns canned responses in order, repeating the last one
/// (or a fixed acknowledgment when empty). Never echoes user content.
pub struct MockUpstream {
    responses: Vec<String>,
    cursor: Mutex<usize>,
}

impl MockUpstream {
    pub fn scripted(responses: Vec<String>) -> Self {
        MockUpstream { responses, cursor: Mutex::new(0) }
    }
}

impl UpstreamClient for MockUpstream {
    fn complete(&self, _context: &[ContextMessage]) -> Result<String, UpstreamError> {
        let mut cursor = self.cursor.lock().expect("mock cursor");
        let i = *cursor;
        *cursor += 1;
        Ok(self
            .responses
            .get(i)
            .or_else(|| self.responses.last())
            .cloned()
            .unwrap_or_else(|| "Understood.".to_string()))
    }
}

/// Mock that quotes the latest user message back, so whatever was sent
/// upstream (pseudonyms included) flows through the de-masking path.
pub struct EchoUpstream;

impl UpstreamClient for EchoUpstream {
    fn complete(&self, context: &[ContextMessage]) -> Result<String, UpstreamError> {
        let last_user = context
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("");
        Ok(format!("Noted: {last_user}"))
    }
}

/// Mock that always fails; for error-path tests.
pub struct FailingUpstream;

impl UpstreamClient for FailingUpstream {
    fn complete(&self, _context: &[ContextMessage]) -> Result<String, UpstreamError> {
        Err(UpstreamError::Request("connection refused".to_string()))
    }
}

/// Every context window actually sent upstream, verbatim, per send.
#[derive(Debug, Clone, Default)]
pub struct OutboundTranscript {
    sends: Vec<Vec<ContextMessage>>,
}

impl OutboundTranscript {
    pub fn record(&mut self, context: Vec<ContextMessage>) {
        self.sends.push(context);
    }

    pub fn sends(&self) -> &[Vec<ContextMessage>] {
        &self.sends
    }

    pub fn last(&self) -> Option<&[ContextMessage]> {
        self.sends.last().map(Vec::as_slice)
    }
}

fn value_present(content: &str, value: &str, entity_type: EntityType) -> bool {
    let ci = matches!(
        entity_type,
        EntityType::Person
            | EntityType::Location
            | EntityType::Organization
            | EntityType::MedicalCondition
            | EntityType::Ethnicity
    );
    contains_value(content, value, ci)
}

fn exposure_in(context: &[ContextMessage], snapshot: &RegistrySnapshot) -> BTreeSet<EntityType> {
    let mut types = BTreeSet::new();
    for entity in snapshot.entities() {
        if context.iter().any(|m| value_present(&m.content, &entity.value, entity.entity_type)) {
            types.insert(entity.entity_type);
        }
    }
    types
}

/// Distinct entity types whose registered real value appears in the final
/// context window sent upstream. Zero for an empty session.
pub fn exposure_final(transcript: &OutboundTranscript, snapshot: &RegistrySnapshot) -> usize {
    transcript.last().map_or(0, |context| exposure_in(context, snapshot).len())
}

/// Distinct entity types whose registered real value appeared in any
/// context window ever sent upstream.
pub fn exposure_ever(transcript: &OutboundTranscript, snapshot: &RegistrySnapshot) -> usize {
    let mut types = BTreeSet::new();
    for context in transcript.sends() {
        types.extend(exposure_in(context, snapshot));
    }
    types.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SessionMode {
    PassThrough,
    Pseudonymize,
}

#[derive(Debug, Clone)]
struct StoredTurn {
    role: Role,
    original: String,
    sanitized: String,
}

/// One conversation driven through the protection pipeline.
pub struct ChatSession {
    id: String,
    config: RiskConfig,
    recognizers: Arc<RecognizerSet>,
    turns: Vec<StoredTurn>,
    registry: SessionRegistry,
    graph: CooccurrenceGraph,
    trace: CpeTrace,
    map: PseudonymMap,
    mode: SessionMode,
    transcript: OutboundTranscript,
    user_turns: usize,
    pending_response: bool,
}

impl ChatSession {
    pub fn new(
        id: impl Into<String>,
        config: RiskConfig,
        seed: u64,
        recognizers: Arc<RecognizerSet>,
    ) -> Self {
        let id = id.into();
        let graph = CooccurrenceGraph::new(config.edge_policy);
        ChatSession {
            registry: SessionRegistry::new(id.clone()),
            id,
            config,
            recognizers,
            turns: Vec::new(),
            graph,
            trace: CpeTrace::new(),
            map: PseudonymMap::new(seed),
            mode: SessionMode::PassThrough,
            transcript: OutboundTranscript::default(),
            user_turns: 0,
            pending_response: false,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn mode(&self) -> SessionMode {
        self.mode
    }

    pub fn cpe(&self) -> Score {
        self.trace.values().last().copied().unwrap_or(0.0)
    }

    pub fn cpe_trace(&self) -> &[Score] {
        self.trace.values()
    }

    /// 0-based user-turn index of the first threshold crossing.
    pub fn trigger_turn(&self) -> Option<usize> {
        self.trace.trigger_turn()
    }

    pub fn triggered(&self) -> bool {
        self.trace.trigger_turn().is_some()
    }

    /// Hard-blocked types observed so far, in type order.
    pub fn blocked_types(&self) -> Vec<EntityType> {
        self.registry
            .type_set()
            .iter()
            .copied()
            .filter(|t| t.is_hard_blocked())
            .collect()
    }

    pub fn registry_snapshot(&self) -> RegistrySnapshot {
        self.registry.snapshot()
    }

    pub fn graph_export(&self) -> GraphExport {
        crate::risk::graph_export(&self.graph, &self.config, &self.trace)
    }

    pub fn transcript(&self) -> &OutboundTranscript {
        &self.transcript
    }

    pub fn pseudonym_map(&self) -> &PseudonymMap {
        &self.map
    }

    pub fn config(&self) -> &RiskConfig {
        &self.config
    }

    /// Full per-turn processing: extract locally, hard-block, record, update
    /// the graph, score, rewrite history on (or after) the trigger, send the
    /// sanitized context upstream, and return the de-masked response.
    pub fn process_turn(
        &mut self,
        message: &str,
        client: &dyn UpstreamClient,
    ) -> Result<String, PipelineError> {
        self.ingest(message)?;
        self.dispatch(client)
    }

    /// Steps up to (not including) the upstream send. After an upstream
    /// failure the recorded turn can be re-sent with [`ChatSession::dispatch`].
    fn ingest(&mut self, message: &str) -> Result<(), PipelineError> {
        let turn = self.user_turns;
        let spans = self.recognizers.detect(message);
        let sanitized = self.hard_block(message, &spans);
        self.registry.record(turn, &spans)?;

        let observed: Vec<EntityType> = spans.iter().map(|s| s.entity_type).collect();
        self.graph.update(&observed);
        let score = cpe_score(&self.graph, &self.config);
        self.trace.append(score);
        let crossed = self.trace.check_threshold(score, self.config.tau);
        if crossed && self.mode == SessionMode::PassThrough {
            self.mode = SessionMode::Pseudonymize;
        }

        self.turns.push(StoredTurn {
            role: Role::User,
            original: message.to_string(),
            sanitized,
        });
        self.user_turns += 1;

        if self.mode == SessionMode::Pseudonymize {
            self.rewrite_all_turns()?;
        }
        self.pending_response = true;
        Ok(())
    }

    /// Send the current sanitized context and append the de-masked
    /// response. On upstream failure the session keeps the recorded user
    /// turn and no assistant turn; the send may be retried.
    fn dispatch(&mut self, client: &dyn UpstreamClient) -> Result<String, PipelineError> {
        if !self.pending_response {
            return Err(PipelineError::NothingToSend);
        }
        let context = self.assemble_context();
        self.transcript.record(context.clone());
        let response = client.complete(&context)?;
        let demasked = self.map.demask(&response);

        let sanitized = if self.mode == SessionMode::Pseudonymize {
            rewrite_text(&response, &self.registry.snapshot(), &mut self.map)?
        } else {
            self.block_registered_values(&response)
        };
        self.turns.push(StoredTurn { role: Role::Assistant, original: response, sanitized });
        self.pending_response = false;
        Ok(demasked)
    }

    /// Retry the upstream send for a turn whose dispatch failed.
    pub fn retry_dispatch(&mut self, client: &dyn UpstreamClient) -> Result<String, PipelineError> {
        self.dispatch(client)
    }

    /// The sanitized context window: the full conversation history, in
    /// order, as it is allowed to leave the process.
    pub fn assemble_context(&self) -> Vec<ContextMessage> {
        self.turns
            .iter()
            .map(|t| ContextMessage { role: t.role, content: t.sanitized.clone() })
            .collect()
    }

    /// Replace hard-blocked detections (exact offsets) and any previously
    /// registered blocked values. Applies from turn 0, in every mode.
    fn hard_block(&self, text: &str, spans: &[DetectionSpan]) -> String {
        let mut out = String::with_capacity(text.len());
        let mut pos = 0;
        for span in spans.iter().filter(|s| s.entity_type.is_hard_blocked()) {
            out.push_str(&text[pos..span.start]);
            out.push_str(BLOCKED_PLACEHOLDER);
            pos = span.end;
        }
        out.push_str(&text[pos..]);
        self.block_registered_values(&out)
    }

    fn block_registered_values(&self, text: &str) -> String {
        let subs: Vec<Substitution> = self
            .registry
            .entities()
            .filter(|e| e.is_blocked())
            .map(|e| Substitution {
                needle: e.value.clone(),
                replacement: BLOCKED_PLACEHOLDER.to_string(),
                case_insensitive: false,
            })
            .collect();
        if subs.is_empty() {
            return text.to_string();
        }
        replace_all(text, &subs)
    }

    /// Recompute every stored turn's sanitized text from its original:
    /// registered values become pseudonyms (or `[BLOCKED]`). Idempotent, and
    /// retrofits entities first seen on later turns into earlier text.
    fn rewrite_all_turns(&mut self) -> Result<(), PipelineError> {
        let snapshot = self.registry.snapshot();
        for i in 0..self.turns.len() {
            let rewritten = rewrite_text(&self.turns[i].original, &snapshot, &mut self.map)?;
            self.turns[i].sanitized = rewritten;
        }
        Ok(())
    }
}
