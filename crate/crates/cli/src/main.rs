use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nls4::harness::{emit_plot_data, execute, load_config, read_report, RunOptions, Verdict};
use nls4::potentials::check_assumptions;
use nls4::radial::RadialGrid;

/// Experiments for the radial fourth-order NLS with potential.
#[derive(Parser)]
#[command(name = "nls4", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sweeps (defaults to all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check the configured potential against the standing assumptions.
    CheckPotential { config: PathBuf },
    /// Print one series of a report as CSV.
    Emit {
        /// Report file or its directory.
        report: PathBuf,
        series: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> nls4::Result<ExitCode> {
    match cli.command {
        Command::Run { config, output_dir, seed, jobs } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(jobs) = jobs {
                // fails only if a pool already exists, in which case it is used as is
                let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
            }
            let opts = RunOptions { cache_dir: std::env::var_os("NLS4_CACHE_DIR").map(PathBuf::from) };
            let outcome = execute(&cfg, &opts)?;
            for (section, check) in outcome.report.all_checks() {
                let name = if section.is_empty() { check.name.clone() } else { format!("{section}/{}", check.name) };
                let measured = check.measured.map_or("-".to_string(), |m| format!("{m:.6e}"));
                let verdict = format!("{:?}", check.verdict).to_lowercase();
                println!("{verdict:7} {name:48} {measured:>14}  {:?}", check.threshold);
                if let Some(note) = &check.note {
                    println!("        {note}");
                }
            }
            println!("report: {}", outcome.report_path.display());
            println!("runtime: {:.1} s", outcome.provenance.runtime_seconds);
            Ok(match outcome.report.verdict {
                Verdict::Fail => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            })
        }
        Command::CheckPotential { config } => {
            let cfg = load_config(&config)?;
            let grid = RadialGrid::new(cfg.grid.n, cfg.grid.r_max, cfg.grid.points, cfg.grid_options())?;
            let spec = cfg.potential_spec()?;
            let report = check_assumptions(&spec, &std::sync::Arc::new(grid), cfg.potential.delta_n)?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| nls4::Error::Format(e.to_string()))?;
            println!("{text}");
            Ok(if report.all_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Emit { report, series, output } => {
            let csv = emit_plot_data(&read_report(&report)?, &series)?;
            match output {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
