//! Scenario execution under three protection modes, and threshold sweeps.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use camp_core::pipeline::{exposure_ever, exposure_final, OutboundTranscript};
use camp_core::risk::{cpe_score, CooccurrenceGraph};
use camp_core::{
    ChatSession, ContextMessage, EchoUpstream, EntityType, RecognizerSet, RiskConfig, Role,
    SensitivityWeights, SessionRegistry, UpstreamClient,
};
use serde::{Deserialize, Serialize};

use crate::baseline::BaselineMasker;
use crate::report::RunReport;
use crate::scenario::ScenarioSpec;
use crate::HarnessError;

/// Protection mode a scenario is replayed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "CAMP")]
    Camp,
    #[serde(rename = "PER_TURN_BASELINE")]
    PerTurnBaseline,
    #[serde(rename = "NONE")]
    NoProtection,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Camp, Mode::PerTurnBaseline, Mode::NoProtection];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Camp => "CAMP",
            Mode::PerTurnBaseline => "PER_TURN_BASELINE",
            Mode::NoProtection => "NONE",
        }
    }

    /// Lowercase token used in file names and on the CLI.
    pub fn token(self) -> &'static str {
        match self {
            Mode::Camp => "camp",
            Mode::PerTurnBaseline => "baseline",
            Mode::NoProtection => "none",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "camp" => Ok(Mode::Camp),
            "baseline" | "per_turn_baseline" => Ok(Mode::PerTurnBaseline),
            "none" => Ok(Mode::NoProtection),
            other => Err(HarnessError::UnknownMode(other.to_string())),
        }
    }
}

/// Run parameters. Identical (fixture, config, seed) inputs produce
/// byte-identical emitted reports.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub tau: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { tau: 2.0, alpha: 0.3, seed: 0 }
    }
}

fn default_recognizers() -> Arc<RecognizerSet> {
    Arc::new(RecognizerSet::with_defaults(SensitivityWeights::standard()))
}

/// Replay one scenario under one mode against the scripted echo upstream.
pub fn run_scenario(
    spec: &ScenarioSpec,
    mode: Mode,
    cfg: &RunConfig,
) -> Result<RunReport, HarnessError> {
    let recognizers = default_recognizers();
    spec.validate(&recognizers)?;
    let started = Instant::now();

    let report = match mode {
        Mode::Camp => run_camp(spec, cfg, recognizers)?,
        Mode::PerTurnBaseline | Mode::NoProtection => run_unprotected(spec, mode, cfg, recognizers)?,
    };

    Ok(RunReport { duration: started.elapsed(), ..report })
}

fn run_camp(
    spec: &ScenarioSpec,
    cfg: &RunConfig,
    recognizers: Arc<RecognizerSet>,
) -> Result<RunReport, HarnessError> {
    let config = RiskConfig::new(cfg.alpha, cfg.tau)?;
    let mut session =
        ChatSession::new(format!("run-{}", spec.id), config, cfg.seed, recognizers);
    let upstream = EchoUpstream;
    for turn in &spec.turns {
        session.process_turn(&turn.text, &upstream)?;
    }
    let snapshot = session.registry_snapshot();
    Ok(RunReport {
        scenario: spec.id.clone(),
        mode: Mode::Camp,
        tau: cfg.tau,
        alpha: cfg.alpha,
        seed: cfg.seed,
        cpe_series: session.cpe_trace().to_vec(),
        trigger_turn: session.trigger_turn().map(|t| t + 1),
        exposure_final: exposure_final(session.transcript(), &snapshot),
        exposure_ever: exposure_ever(session.transcript(), &snapshot),
        blocked_types: session.blocked_types(),
        duration: Default::default(),
    })
}

/// Baseline and no-protection modes share the same loop: the full history
/// (masked or raw) is forwarded every turn, the CPE series is measured on
/// the disclosure schedule for reference, and nothing ever triggers.
fn run_unprotected(
    spec: &ScenarioSpec,
    mode: Mode,
    cfg: &RunConfig,
    recognizers: Arc<RecognizerSet>,
) -> Result<RunReport, HarnessError> {
    let config = RiskConfig::new(cfg.alpha, cfg.tau)?;
    let masker = BaselineMasker::structured_default();
    let upstream = EchoUpstream;

    let mut registry = SessionRegistry::new(format!("measure-{}", spec.id));
    let mut graph = CooccurrenceGraph::new(config.edge_policy);
    let mut series = Vec::with_capacity(spec.turns.len());
    let mut context: Vec<ContextMessage> = Vec::new();
    let mut transcript = OutboundTranscript::default();

    for (i, turn) in spec.turns.iter().enumerate() {
        let spans = recognizers.detect(&turn.text);
        registry.record(i, &spans)?;
        let observed: Vec<EntityType> = spans.iter().map(|s| s.entity_type).collect();
        graph.update(&observed);
        series.push(cpe_score(&graph, &config));

        let outbound = match mode {
            Mode::PerTurnBaseline => masker.mask(&turn.text),
            _ => turn.text.clone(),
        };
        context.push(ContextMessage { role: Role::User, content: outbound });
        transcript.record(context.clone());
        let response = upstream.complete(&context)?;
        context.push(ContextMessage { role: Role::Assistant, content: response });
    }

    let snapshot = registry.snapshot();
    Ok(RunReport {
        scenario: spec.id.clone(),
        mode,
        tau: cfg.tau,
        alpha: cfg.alpha,
        seed: cfg.seed,
        cpe_series: series,
        trigger_turn: None,
        exposure_final: exposure_final(&transcript, &snapshot),
        exposure_ever: exposure_ever(&transcript, &snapshot),
        blocked_types: snapshot
            .type_set()
            .iter()
            .copied()
            .filter(|t| t.is_hard_blocked())
            .collect(),
        duration: Default::default(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub trigger_turn: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub scenario: String,
    pub alpha: f64,
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub reports: Vec<RunReport>,
}

/// One protected run per threshold; trigger turns must be non-decreasing
/// in tau.
pub fn sweep(
    spec: &ScenarioSpec,
    taus: &[f64],
    alpha: f64,
    seed: u64,
) -> Result<SweepTable, HarnessError> {
    if taus.is_empty() || taus.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::BadTauList);
    }
    let mut rows = Vec::with_capacity(taus.len());
    let mut reports = Vec::with_capacity(taus.len());
    for &tau in taus {
        let report = run_scenario(spec, Mode::Camp, &RunConfig { tau, alpha, seed })?;
        rows.push(SweepRow { tau, trigger_turn: report.trigger_turn });
        reports.push(report);
    }
    for w in rows.windows(2) {
        let earlier = w[0].trigger_turn;
        let later = w[1].trigger_turn;
        let monotone = match (earlier, later) {
            (Some(a), Some(b)) => a <= b,
            (Some(_), None) | (None, None) => true,
            (None, Some(_)) => false,
        };
        if !monotone {
            return Err(HarnessError::NonMonotoneTriggers { scenario: spec.id.clone() });
        }
    }
    Ok(SweepTable { scenario: spec.id.clone(), alpha, rows, reports })
}
