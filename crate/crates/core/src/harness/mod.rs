//! Experiment configuration, the experiment registry and report persistence.

mod config;
mod data;
mod experiments;
mod report;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{
    load_config, parse_config, CriticalTag, DataKind, DataSection, ExperimentConfig, ExperimentKind, GridSection,
    Knobs, PotentialSection, Power, SimulationSection, Tolerances,
};
pub use data::{build_datum, gaussian, normalized, random_modes, seeded_rng, with_h2dot, RANDOM_MODES};
pub use experiments::{run_experiment, RunOptions};
pub use report::{
    emit_plot_data, read_report, write_report, Bound, Check, ExperimentReport, Provenance, Section, Series, Verdict,
    PROVENANCE_FILE, REPORT_FILE,
};

use crate::error::Result;

pub struct RunOutcome {
    pub report: ExperimentReport,
    pub report_path: PathBuf,
    pub provenance: Provenance,
}

/// Runs `cfg` and writes its report under `<output_dir>/<experiment>/`.
pub fn execute(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let start = Instant::now();
    let report = run_experiment(cfg, opts);
    let provenance = Provenance {
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        runtime_seconds: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
    };
    let dir = report_dir(&cfg.output_dir, cfg.experiment);
    let report_path = write_report(&report, &provenance, &dir)?;
    Ok(RunOutcome { report, report_path, provenance })
}

pub fn report_dir(output_dir: &Path, kind: ExperimentKind) -> PathBuf {
    output_dir.join(kind.name())
}
