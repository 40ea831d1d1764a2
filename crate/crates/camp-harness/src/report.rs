//! Run reports and their file outputs.
//!
//! `emit_reports` writes one `report_*.json` per run, a `summary.csv` with
//! stable field ordering, and `cpe_series_<scenario>_<tau>.csv` time-series
//! files for plotting. Wall-clock duration is kept off disk so identical
//! inputs emit byte-identical files.

use std::path::{Path, PathBuf};
use std::time::Duration;

use camp_core::EntityType;
use serde::{Deserialize, Serialize};

use crate::runner::Mode;
use crate::HarnessError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub mode: Mode,
    pub tau: f64,
    pub alpha: f64,
    pub seed: u64,
    /// One value per turn, 1-based turn order, non-decreasing.
    pub cpe_series: Vec<f64>,
    /// 1-based turn number of the first threshold crossing; absent for
    /// baseline and no-protection runs.
    pub trigger_turn: Option<usize>,
    /// Distinct entity types whose real value appears in the final context
    /// window sent upstream.
    pub exposure_final: usize,
    /// Distinct entity types whose real value appeared in any context
    /// window sent upstream.
    pub exposure_ever: usize,
    pub blocked_types: Vec<EntityType>,
    #[serde(skip)]
    pub duration: Duration,
}

impl RunReport {
    pub fn final_cpe(&self) -> f64 {
        self.cpe_series.last().copied().unwrap_or(0.0)
    }
}

/// Minimal-roundtrip float formatting: `2.0` stays "2.0", `1.5` stays "1.5".
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

pub const SUMMARY_HEADER: &str =
    "scenario,mode,tau,alpha,trigger_turn,exposure_final,exposure_ever,final_cpe";

pub fn summary_csv(reports: &[RunReport]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in reports {
        let trigger = r.trigger_turn.map(|t| t.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.6}\n",
            r.scenario,
            r.mode,
            format_float(r.tau),
            format_float(r.alpha),
            trigger,
            r.exposure_final,
            r.exposure_ever,
            r.final_cpe()
        ));
    }
    out
}

pub fn series_csv(report: &RunReport) -> String {
    let mut out = String::from("turn,cpe\n");
    for (i, v) in report.cpe_series.iter().enumerate() {
        out.push_str(&format!("{},{:.6}\n", i + 1, v));
    }
    out
}

fn report_file_name(report: &RunReport) -> String {
    format!(
        "report_{}_{}_{}.json",
        report.scenario,
        report.mode.token(),
        format_float(report.tau)
    )
}

/// Write all report artifacts into `dir`, creating it if needed. Returns
/// the paths written.
pub fn emit_reports(reports: &[RunReport], dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if reports.is_empty() {
        return Err(HarnessError::NoReports);
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let summary_path = dir.join("summary.csv");
    std::fs::write(&summary_path, summary_csv(reports))?;
    written.push(summary_path);

    for report in reports {
        let json_path = dir.join(report_file_name(report));
        std::fs::write(&json_path, serde_json::to_string_pretty(report)?)?;
        written.push(json_path);

        let series_path = dir.join(format!(
            "cpe_series_{}_{}.csv",
            report.scenario,
            format_float(report.tau)
        ));
        std::fs::write(&series_path, series_csv(report))?;
        written.push(series_path);
    }
    Ok(written)
}

/// Read every `report_*.json` under `dir`, sorted by file name.
pub fn read_reports(dir: &Path) -> Result<Vec<RunReport>, HarnessError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("report_") && n.ends_with(".json"))
        })
        .collect();
    paths.sort();
    let mut reports = Vec::with_capacity(paths.len());
    for path in paths {
        let doc = std::fs::read_to_string(&path)?;
        reports.push(serde_json::from_str(&doc)?);
    }
    Ok(reports)
}
