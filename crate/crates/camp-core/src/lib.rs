//! Session-aware privacy middleware for multi-turn LLM conversations.
//!
//! Per-turn maskers treat each message in isolation and miss the profile a
//! user builds up across a session, a name in one turn and an employer or
//! city several turns later.
//! This crate keeps a session registry of every detected entity, models
//! combination risk with a co-occurrence graph over entity types, scores
//! cumulative exposure after every turn, and once the score crosses a
//! configurable threshold retroactively pseudonymizes the whole history
//! before anything else is sent upstream. A de-masking pass restores real
//! values in responses, so the caller sees a normal conversation while the
//! external model only ever processes synthetic identities. Irreversible
//! identifiers (SSN, card, account, IBAN) are blocked outright from turn 0.
//!
//! The scoring math is generic over the float type via `num-traits`;
//! [`Score`] fixes the crate-wide default of `f64`.

pub mod entities;
pub mod extractor;
pub mod pipeline;
pub mod pseudonym;
pub mod registry;
pub mod risk;
pub mod textscan;

/// Default scalar for scores, weights, and thresholds.
pub type Score = f64;

pub use entities::{
    canonical_value, DetectionSpan, EntityType, SensitivityWeights, SessionEntity, WeightError,
};
pub use extractor::{
    luhn_valid, ExtractorError, Gazetteer, PatternRecognizer, Recognize, RecognizerSet,
};
pub use pipeline::{
    exposure_ever, exposure_final, ChatSession, ContextMessage, EchoUpstream, MockUpstream,
    OutboundTranscript, PipelineError, Role, SessionMode, UpstreamClient, UpstreamError,
};
pub use pseudonym::{
    rewrite_history, rewrite_text, PseudonymError, PseudonymMap, SyntheticGenerator,
    BLOCKED_PLACEHOLDER,
};
pub use registry::{RegistryError, RegistryExport, RegistrySnapshot, SessionRegistry};
pub use risk::{
    amplifier, cpe_score, graph_export, CooccurrenceGraph, CpeTrace, EdgePolicy, GraphExport,
    RiskConfig, RiskError,
};
