//! `camp` command line: replay scenarios, sweep thresholds, inspect
//! extraction, aggregate reports, and run the proxy service.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context};
use camp_core::{RecognizerSet, SensitivityWeights};
use camp_harness::{
    emit_reports, read_reports, run_scenario, summary_csv, sweep, Mode, RunConfig, ScenarioSpec,
};
use camp_service::{AppState, HttpUpstreamClient, ServiceConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "camp", version, about = "Session-aware privacy proxy and evaluation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a scenario file under one protection mode and emit reports.
    RunScenario {
        #[arg(long)]
        scenario: PathBuf,
        /// camp | baseline | none
        #[arg(long, default_value = "camp")]
        mode: String,
        #[arg(long, default_value_t = 2.0)]
        tau: f64,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for summary, report, and series files.
        #[arg(long, default_value = "camp-out")]
        out: PathBuf,
    },
    /// Run the protected mode across a threshold list and print the
    /// trigger-turn table.
    SweepThresholds {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated ascending thresholds, e.g. 1.5,2.0,2.5
        #[arg(long, default_value = "1.5,2.0,2.5")]
        taus: String,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional output directory for the per-run reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detect PII spans in a text and print them as JSON records.
    Extract {
        #[arg(long)]
        text: String,
    },
    /// Start the chat proxy.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Upstream chat-completion endpoint URL.
        #[arg(long)]
        upstream: String,
        #[arg(long, default_value_t = 2.0)]
        tau: f64,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value = "default")]
        model: String,
        /// Environment variable holding the upstream credential.
        #[arg(long, default_value = "CAMP_UPSTREAM_API_KEY")]
        credential_env: String,
        #[arg(long, default_value_t = 1800)]
        ttl_secs: u64,
        /// Flat TOML file overriding entity weights.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Directory of gazetteer files replacing the bundled lists.
        #[arg(long)]
        gazetteers: Option<PathBuf>,
        /// Omit risk metadata from chat responses.
        #[arg(long)]
        no_meta: bool,
    },
    /// Aggregate previously emitted run reports into a summary table.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::RunScenario { scenario, mode, tau, alpha, seed, out } => {
            let spec = ScenarioSpec::from_file(&scenario)
                .with_context(|| format!("loading {}", scenario.display()))?;
            let mode: Mode = mode.parse()?;
            let report = run_scenario(&spec, mode, &RunConfig { tau, alpha, seed })?;
            let written = emit_reports(std::slice::from_ref(&report), &out)?;
            print!("{}", summary_csv(std::slice::from_ref(&report)));
            for path in written {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::SweepThresholds { scenario, taus, alpha, seed, out } => {
            let spec = ScenarioSpec::from_file(&scenario)?;
            let taus = parse_taus(&taus)?;
            let table = sweep(&spec, &taus, alpha, seed)?;
            println!("scenario,tau,trigger_turn");
            for row in &table.rows {
                let trigger =
                    row.trigger_turn.map(|t| t.to_string()).unwrap_or_else(|| "-".to_string());
                println!("{},{:?},{}", table.scenario, row.tau, trigger);
            }
            if let Some(out) = out {
                emit_reports(&table.reports, &out)?;
                eprintln!("wrote reports to {}", out.display());
            }
            Ok(())
        }
        Command::Extract { text } => {
            let recognizers = RecognizerSet::with_defaults(SensitivityWeights::standard());
            let spans = recognizers.detect(&text);
            println!("{}", serde_json::to_string_pretty(&spans)?);
            Ok(())
        }
        Command::Serve {
            port,
            upstream,
            tau,
            alpha,
            model,
            credential_env,
            ttl_secs,
            weights,
            gazetteers,
            no_meta,
        } => {
            tracing_subscriber::fmt().init();
            let config = ServiceConfig {
                port,
                upstream_url: Some(upstream.clone()),
                credential_env: credential_env.clone(),
                model: model.clone(),
                tau,
                alpha,
                ttl: Duration::from_secs(ttl_secs),
                weight_override_path: weights,
                gazetteer_dir: gazetteers,
                expose_meta: !no_meta,
                ..ServiceConfig::default()
            };
            let client = HttpUpstreamClient::new(
                upstream,
                model,
                &credential_env,
                config.upstream_timeout,
            )
            .map_err(|e| anyhow::anyhow!("{e}"))?;
            let state = AppState::new(config, Arc::new(client))?;
            tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()?
                .block_on(camp_service::serve(state))?;
            Ok(())
        }
        Command::Report { input } => {
            let reports = read_reports(&input)?;
            if reports.is_empty() {
                bail!("no report_*.json files under {}", input.display());
            }
            print!("{}", summary_csv(&reports));
            Ok(())
        }
    }
}

fn parse_taus(raw: &str) -> anyhow::Result<Vec<f64>> {
    let taus: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let taus = taus.context("thresholds must be numbers, e.g. 1.5,2.0,2.5")?;
    Ok(taus)
}
