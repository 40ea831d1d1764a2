//! Scenario replay harness: drives conversations through the protection
//! pipeline, a per-turn baseline masker, and a no-protection passthrough;
//! sweeps thresholds; and emits machine-readable run reports and CPE
//! time-series files.

pub mod baseline;
pub mod fixtures;
pub mod report;
pub mod runner;
pub mod scenario;

use thiserror::Error;

pub use baseline::{BaselineMasker, STRUCTURED_DEFAULT};
pub use report::{emit_reports, read_reports, summary_csv, RunReport};
pub use runner::{run_scenario, sweep, Mode, RunConfig, SweepRow, SweepTable};
pub use scenario::{EntityAnnotation, ScenarioSpec, TurnSpec};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("fixture `{scenario}` turn {turn}: {detail}")]
    FixtureValidation { scenario: String, turn: usize, detail: String },
    #[error("scenario has no turns")]
    EmptyScenario,
    #[error("unknown mode `{0}` (expected camp|baseline|none)")]
    UnknownMode(String),
    #[error("tau list must be non-empty and strictly ascending")]
    BadTauList,
    #[error("trigger turn not monotone in tau for `{scenario}`")]
    NonMonotoneTriggers { scenario: String },
    #[error("no reports to emit")]
    NoReports,
    #[error(transparent)]
    Pipeline(#[from] camp_core::PipelineError),
    #[error(transparent)]
    Upstream(#[from] camp_core::UpstreamError),
    #[error(transparent)]
    Risk(#[from] camp_core::RiskError),
    #[error(transparent)]
    Registry(#[from] camp_core::RegistryError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
