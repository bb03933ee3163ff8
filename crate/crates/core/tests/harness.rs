use nls4::harness::*;
use nls4::Error;

fn conservation_config() -> &'static str {
    include_str!("../../../configs/conservation.toml")
}

#[test]
fn every_shipped_config_parses() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert_eq!(seen, 12);
}

#[test]
fn misspelled_key_is_named() {
    let err = parse_config("experiment = \"conservation\"\n[simulation]\nlamda = 1.0\n").unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("lamda"), "{err}");
}

#[test]
fn unknown_experiment_is_rejected() {
    let err = parse_config("experiment = \"blowup\"\n").unwrap_err();
    assert!(err.to_string().contains("blowup"), "{err}");
}

#[test]
fn critical_power_resolves_per_dimension() {
    let cfg = parse_config("experiment = \"conservation\"\n[simulation]\np = \"critical\"\n").unwrap();
    assert_eq!(cfg.simulation_config().p, 9.0);
    let cfg = parse_config("experiment = \"conservation\"\n[grid]\nn = 6\n[simulation]\np = \"critical\"\n").unwrap();
    assert_eq!(cfg.simulation_config().p, 5.0);
    let cfg = parse_config("experiment = \"conservation\"\n[simulation]\np = 3.0\n").unwrap();
    assert_eq!(cfg.simulation.p, Power::Value(3.0));
}

#[test]
fn minimal_config_fills_defaults() {
    let cfg = parse_config("experiment = \"decay\"\n").unwrap();
    assert_eq!(cfg, ExperimentConfig::minimal(ExperimentKind::Decay));
    assert_eq!(cfg.grid.n, 5);
    assert_eq!(cfg.simulation.dt, 1e-3);
    assert_eq!(cfg.tolerances.mass_drift, 1e-8);
}

#[test]
fn inadmissible_pair_is_rejected() {
    let text = "experiment = \"strichartz\"\n[knobs]\npairs = [[\"2\", \"3\"]]\n";
    assert!(matches!(parse_config(text), Err(Error::NotAdmissible { .. })));
    let text = "experiment = \"strichartz\"\n[knobs]\npairs = [[\"18\", \"90/41\"]]\n";
    assert!(parse_config(text).is_ok());
}

#[test]
fn invalid_values_fail_before_running() {
    for text in [
        "experiment = \"conservation\"\n[grid]\nn = 4\n",
        "experiment = \"conservation\"\n[grid]\npoints = 3\n",
        "experiment = \"conservation\"\n[simulation]\ndt = -1.0\n",
        "experiment = \"conservation\"\n[data]\nsigma = 0.0\n",
        "experiment = \"morawetz\"\n[simulation]\np = 3.0\n",
        "experiment = \"final_state\"\n[simulation]\nsnapshot_stride = 1\n[knobs]\nt_start = 5.0\n",
        "experiment = \"sobolev_equiv\"\n[knobs]\np_list = [3.0]\n",
    ] {
        assert!(parse_config(text).is_err(), "{text}");
    }
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = parse_config(conservation_config()).unwrap();
    let text = toml::to_string(&cfg).unwrap();
    assert_eq!(parse_config(&text).unwrap(), cfg);
}

#[test]
fn bounds_admit_their_ranges() {
    assert!(Bound::AtMost(1.0).admits(1.0));
    assert!(!Bound::Below(1.0).admits(1.0));
    assert!(Bound::AtLeast(3.0).admits(4.0));
    assert!(Bound::Within([0.5, 2.0]).admits(0.5));
    assert!(!Bound::Within([0.5, 2.0]).admits(2.1));
    assert!(!Bound::AtMost(1.0).admits(f64::NAN));
}

#[test]
fn worst_verdict_wins() {
    assert!(Verdict::Fail > Verdict::Skipped && Verdict::Skipped > Verdict::Pass);
    let mut report = ExperimentReport::new(ExperimentConfig::minimal(ExperimentKind::Decay));
    report.check(Check::measure("a", 0.5, Bound::AtMost(1.0)));
    assert_eq!(report.worst(), Verdict::Pass);
    report.check(Check::skipped("b", Bound::AtMost(1.0), "at roundoff"));
    assert_eq!(report.worst(), Verdict::Skipped);
    report.check(Check::measure("c", 2.0, Bound::AtMost(1.0)));
    assert_eq!(report.worst(), Verdict::Fail);
}

fn small_report() -> ExperimentReport {
    let mut report = ExperimentReport::new(ExperimentConfig::minimal(ExperimentKind::WaveOperator));
    report.check(Check::measure("gap", 0.01, Bound::Below(0.1)));
    report.value("first", 1.5);
    report.series("gaps", Series::from_columns(&["t", "gap"], &[&[5.0, 10.0], &[1e-3, 2e-4]]));
    report
}

#[test]
fn emit_returns_csv_or_lists_names() {
    let report = small_report();
    let csv = emit_plot_data(&report, "gaps").unwrap();
    assert_eq!(csv.lines().next(), Some("t,gap"));
    assert_eq!(csv.lines().count(), 3);
    match emit_plot_data(&report, "gapz") {
        Err(Error::UnknownSeries { name, available }) => {
            assert_eq!(name, "gapz");
            assert!(available.contains("gaps"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn written_report_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let report = small_report();
    let prov = Provenance { code_version: "test".into(), timestamp_unix: 0, runtime_seconds: 0.25, seed: 0 };
    let path = write_report(&report, &prov, dir.path()).unwrap();
    assert_eq!(path, dir.path().join(REPORT_FILE));
    assert!(dir.path().join(PROVENANCE_FILE).exists());
    assert!(dir.path().join("gaps.csv").exists());
    let back = read_report(dir.path()).unwrap();
    assert_eq!(back.body().unwrap(), report.body().unwrap());
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn report_body_has_no_timing() {
    let body = small_report().body().unwrap();
    assert!(!body.contains("runtime") && !body.contains("timestamp"));
}

#[test]
fn execute_writes_under_experiment_directory() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(include_str!("../../../configs/sobolev_equiv.toml")).unwrap();
    cfg.output_dir = dir.path().to_path_buf();
    cfg.knobs.draws = 3;
    let outcome = execute(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(outcome.report_path, report_dir(dir.path(), ExperimentKind::SobolevEquiv).join(REPORT_FILE));
    assert_eq!(outcome.report.worst(), Verdict::Pass);
    assert_eq!(read_report(&outcome.report_path).unwrap().body().unwrap(), outcome.report.body().unwrap());
}

#[test]
fn module_errors_become_failed_checks() {
    let mut cfg = ExperimentConfig::minimal(ExperimentKind::Conservation);
    cfg.grid.points = 64;
    cfg.grid.r_max = 4.0;
    cfg.data.amplitude = 50.0;
    cfg.simulation.t_end = 0.01;
    cfg.simulation.blowup_factor = 2.0;
    let report = run_experiment(&cfg, &RunOptions::default());
    assert_eq!(report.worst(), Verdict::Fail);
}
