use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nls4::harness::{parse_config, run_experiment, ExperimentReport, RunOptions, Verdict};
use nls4::potentials::PotentialSpec;
use nls4::radial::{lp_norm, make_grid, RadialField};
use nls4::solver::{run_trajectory, solve_picard, SimulationConfig};
use nls4::spectral::{build_operator, OperatorKind};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(text: &str, opts: &RunOptions) -> (ExperimentReport, Duration) {
    let cfg = parse_config(text).expect("config parses");
    let start = Instant::now();
    let report = run_experiment(&cfg, opts);
    (report, start.elapsed())
}

fn summary(report: &ExperimentReport) -> String {
    report
        .all_checks()
        .map(|(label, c)| {
            let name = if label.is_empty() { c.name.clone() } else { format!("{label}.{}", c.name) };
            match c.measured {
                Some(x) => format!("{name}={x:.4e}:{:?}", c.verdict),
                None => format!("{name}:{:?}", c.verdict),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn experiment(text: &str, opts: &RunOptions, budget: Option<Duration>) -> Outcome {
    let (report, elapsed) = run(text, opts);
    let in_time = budget.is_none_or(|b| elapsed <= b);
    Outcome {
        pass: report.worst() == Verdict::Pass && in_time,
        detail: format!("{} ({:.1}s)", summary(&report), elapsed.as_secs_f64()),
    }
}

fn oracle_equivalence() -> Outcome {
    let g = make_grid(5, 30.0, 256).unwrap();
    let spec = PotentialSpec::inverse_bracket(5, 0.01, 10.0).unwrap();
    let op = build_operator(OperatorKind::Full, &g, Some(&spec)).unwrap();
    let u = RadialField::from_real_fn(Arc::clone(&g), |r| (-r * r / 8.0).exp()).unwrap();
    let t = 0.2;
    let reference = solve_picard(&u, &op, &SimulationConfig::new(1.0, 9.0, 1e-3, t), t).unwrap();
    let constants: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&dt| {
            let mut c = SimulationConfig::new(1.0, 9.0, dt, t);
            c.monitor_stride = 1000;
            c.snapshot_stride = 1000;
            let rec = run_trajectory(&u, &op, &c).unwrap();
            let last = &rec.snapshots.last().unwrap().1;
            lp_norm(&last.sub(&reference).unwrap(), 2.0).unwrap() / (dt * dt)
        })
        .collect();
    let max = constants.iter().cloned().fold(0.0, f64::max);
    let min = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome { pass: max / min < 1.5, detail: format!("C={constants:.4?} max/min={:.3}", max / min) }
}

fn determinism(text: &str, opts: &RunOptions) -> Outcome {
    let (a, _) = run(text, opts);
    let (b, _) = run(text, opts);
    let (a, b) = (a.body().unwrap(), b.body().unwrap());
    Outcome { pass: a == b, detail: format!("{} bytes", a.len()) }
}

fn main() -> ExitCode {
    let cache = tempfile::tempdir().unwrap();
    let opts = RunOptions { cache_dir: Some(cache.path().to_path_buf()) };
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));

    let criteria: Vec<Criterion> = vec![
        ("conservation", Box::new(|| experiment(include_str!("../../../configs/conservation.toml"), &opts, minutes(2)))),
        ("decay_exponent", Box::new(|| experiment(include_str!("../../../configs/decay.toml"), &opts, minutes(5)))),
        ("sobolev_equivalence", Box::new(|| experiment(include_str!("../../../configs/sobolev_equiv.toml"), &opts, None))),
        ("strichartz_quotient", Box::new(|| experiment(include_str!("../../../configs/strichartz.toml"), &opts, None))),
        ("localized_mass_rate", Box::new(|| experiment(include_str!("../../../configs/localized_mass.toml"), &opts, None))),
        ("morawetz", Box::new(|| experiment(include_str!("../../../configs/morawetz.toml"), &opts, None))),
        ("small_data_global", Box::new(|| experiment(include_str!("../../../configs/small_data_global.toml"), &opts, None))),
        ("picard_vs_strang", Box::new(oracle_equivalence)),
        ("scattering", Box::new(|| experiment(include_str!("../../../configs/scattering.toml"), &opts, None))),
        ("final_state_round_trip", Box::new(|| experiment(include_str!("../../../configs/final_state.toml"), &opts, None))),
        ("wave_operator_convergence", Box::new(|| experiment(include_str!("../../../configs/wave_operator.toml"), &opts, None))),
        ("determinism", Box::new(|| determinism(include_str!("../../../configs/conservation.toml"), &opts))),
    ];

    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let outcome = criterion();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        if !outcome.pass {
            failures += 1;
        }
        println!("[{tag}] {:>2} {name}: {}", i + 1, outcome.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
