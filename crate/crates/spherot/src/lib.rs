//! Batch front-end for `spherot-core`: experiment configuration, file
//! formats, the pipelines behind each command and deterministic reports.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod pipelines;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use spherot_core::CostProfile;

pub use config::{Command, ExperimentConfig};
pub use error::{AppError, Result};
use pipelines::Context;
use report::{Manifest, Report};

/// Exit status of a run whose checks all passed.
pub const EXIT_PASSED: i32 = 0;
/// Exit status of a run with at least one failed check.
pub const EXIT_FAILED: i32 = 1;

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub report: Report,
    pub out_dir: PathBuf,
    pub artifacts: Vec<String>,
}

impl RunSummary {
    pub fn exit_status(&self) -> i32 {
        if self.report.passed {
            EXIT_PASSED
        } else {
            EXIT_FAILED
        }
    }
}

/// Runs the configured pipeline and writes `report.json`, the tables and
/// `manifest.json` into the output directory.
pub fn run(config: ExperimentConfig) -> Result<RunSummary> {
    let config = config.resolve();
    config.validate().map_err(|(key, msg)| AppError::InvalidArgument(format!("{key}: {msg}")))?;
    let tol = config.tolerance_table().map_err(AppError::InvalidArgument)?;
    let profile = match config.command {
        Command::Antenna => CostProfile::AntennaLog,
        _ => config.cost_profile()?,
    };
    let threads = config.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| AppError::Output(format!("thread pool: {e}")))?;

    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let ctx = Context { config: &config, profile, tol };
    let outcome = pool.install(|| pipelines::run_pipeline(&ctx))?;
    let report = Report::new(&config, ctx.profile.name(), &ctx.tol, outcome.checks, outcome.details);

    let out = config.out.clone();
    std::fs::create_dir_all(&out).map_err(|e| AppError::io(&out, e))?;
    let mut artifacts = vec!["report.json".to_string()];
    write(&out, "report.json", &report.to_json()?)?;
    for table in &outcome.tables {
        table.write_to(&out)?;
        artifacts.push(table.file.clone());
    }
    for (name, contents) in &outcome.files {
        write(&out, name, contents)?;
        artifacts.push(name.clone());
    }
    artifacts.push("manifest.json".into());
    let summary = RunSummary { report, out_dir: out.clone(), artifacts };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        tolerances: summary.report.tolerances.clone(),
        threads,
        started_unix: started,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        artifacts: summary.artifacts.clone(),
        passed: summary.report.passed,
        exit_status: summary.exit_status(),
    };
    write(&out, "manifest.json", &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    Ok(summary)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| AppError::io(path, e))
}
