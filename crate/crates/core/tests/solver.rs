use std::sync::Arc;

use nls4::potentials::PotentialSpec;
use nls4::radial::{lp_norm, make_grid, RadialField, RadialGrid};
use nls4::solver::*;
use nls4::spectral::{apply_function, build_operator, OperatorKind, SpectralFunction, SpectralOperator};
use nls4::Error;
use num_complex::Complex64;

fn setup(points: usize, r_max: f64) -> (Arc<RadialGrid>, SpectralOperator) {
    let g = make_grid(5, r_max, points).unwrap();
    let spec = PotentialSpec::inverse_bracket(5, 0.01, 10.0).unwrap();
    let op = build_operator(OperatorKind::Full, &g, Some(&spec)).unwrap();
    (g, op)
}

fn gaussian(g: &Arc<RadialGrid>, amp: f64, sigma: f64) -> RadialField {
    RadialField::from_real_fn(g.clone(), |r| amp * (-r * r / (2.0 * sigma * sigma)).exp()).unwrap()
}

fn l2_diff(a: &RadialField, b: &RadialField) -> f64 {
    lp_norm(&a.sub(b).unwrap(), 2.0).unwrap()
}

#[test]
fn linear_splitting_is_the_propagator() {
    let (g, op) = setup(128, 30.0);
    let u = gaussian(&g, 1.0, 2.0);
    let cfg = SimulationConfig::new(0.0, 3.0, 0.01, 1.0);
    let stepped = step_strang(&u, &op, &cfg).unwrap();
    let exact = apply_function(&op, SpectralFunction::ExpIt(0.01), &u).unwrap();
    assert_eq!(stepped.values(), exact.values());
}

#[test]
fn nonlinear_substep_keeps_moduli() {
    let mut v = vec![Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.1)];
    let before: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    nonlinear_phase(&mut v, 0.37, 9.0, 0.0).unwrap();
    for (z, m) in v.iter().zip(before) {
        assert!((z.norm() - m).abs() < 1e-15);
    }
}

#[test]
fn step_halving_local_error_is_third_order() {
    let (g, op) = setup(256, 30.0);
    let u = gaussian(&g, 1.0, 2.0);
    let local = |dt: f64| {
        let one = step_strang(&u, &op, &SimulationConfig::new(1.0, 9.0, dt, 1.0)).unwrap();
        let half = SimulationConfig::new(1.0, 9.0, dt / 2.0, 1.0);
        let two = step_strang(&step_strang(&u, &op, &half).unwrap(), &op, &half).unwrap();
        l2_diff(&one, &two)
    };
    let ratio = local(2e-3) / local(1e-3);
    assert!((ratio - 8.0).abs() < 0.2 * 8.0, "ratio {ratio}");
}

#[test]
fn linear_run_conserves_mass() {
    let (g, op) = setup(512, 40.0);
    let u = gaussian(&g, 1.0, 2.7);
    let mut cfg = SimulationConfig::new(0.0, 3.0, 1e-3, 1.0);
    cfg.monitor_stride = 50;
    let rec = run_trajectory(&u, &op, &cfg).unwrap();
    assert!(rec.is_completed(), "{:?}", rec.status);
    assert!(rec.mass_drift() <= 1e-10, "{}", rec.mass_drift());
    assert_eq!(rec.times.len(), 21);
    let lens = [rec.mass_series.len(), rec.energy_series.len(), rec.h2dot_series.len(), rec.boundary_mass_series.len()];
    assert!(lens.iter().all(|&l| l == 21));
}

#[test]
fn boundary_contamination_halts_the_run() {
    let (g, op) = setup(128, 12.0);
    let u = RadialField::from_fn(g.clone(), |r| Complex64::from_polar((-(r - 6.0).powi(2)).exp(), 3.0 * r)).unwrap();
    let mut cfg = SimulationConfig::new(0.0, 3.0, 0.01, 5.0);
    cfg.monitor_stride = 10;
    let rec = run_trajectory(&u, &op, &cfg).unwrap();
    assert!(matches!(rec.status, TrajectoryStatus::BoundaryContaminated { .. }));
    assert!(rec.end_time() < 5.0);
}

#[test]
fn picard_linear_case_is_one_sweep() {
    let (g, op) = setup(128, 30.0);
    let u = gaussian(&g, 1.0, 2.0);
    let cfg = SimulationConfig::new(0.0, 9.0, 1e-3, 1.0);
    let out = solve_picard_outcome(&u, &op, &cfg, 0.2).unwrap();
    assert_eq!(out.iterations, 1);
    let exact = apply_function(&op, SpectralFunction::ExpIt(0.2), &u).unwrap();
    assert!(l2_diff(&out.state, &exact) < 1e-12);
}

#[test]
fn picard_matches_splitting_at_second_order() {
    let (g, op) = setup(256, 30.0);
    let u = gaussian(&g, 1.0, 2.0);
    let t = 0.2;
    let cfg = SimulationConfig::new(1.0, 9.0, 1e-3, t);
    let reference = solve_picard(&u, &op, &cfg, t).unwrap();
    let mut constants = Vec::new();
    for dt in [4e-3, 2e-3, 1e-3] {
        let mut c = SimulationConfig::new(1.0, 9.0, dt, t);
        c.monitor_stride = 1000;
        c.snapshot_stride = 1000;
        let rec = run_trajectory(&u, &op, &c).unwrap();
        let last = &rec.snapshots.last().unwrap().1;
        constants.push(l2_diff(last, &reference) / (dt * dt));
    }
    let max = constants.iter().cloned().fold(0.0, f64::max);
    let min = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min < 1.5, "{constants:?}");
}

#[test]
fn picard_reports_loss_of_contraction() {
    let (g, op) = setup(128, 30.0);
    let u = gaussian(&g, 3.0, 1.0);
    let mut cfg = SimulationConfig::new(1.0, 9.0, 1e-3, 1.0);
    cfg.picard_max_iter = 40;
    let mut factors = Vec::new();
    for t in [0.0005, 0.001, 0.002, 0.004] {
        match solve_picard_outcome(&u, &op, &cfg, t) {
            Ok(o) => factors.push(o.contraction_factor),
            Err(Error::NonContraction { factor, .. }) | Err(Error::NotConverged { factor, .. }) => {
                factors.push(factor);
                break;
            }
            Err(e) => panic!("{e}"),
        }
    }
    assert!(factors.windows(2).all(|w| w[1] >= w[0]), "{factors:?}");
    assert!(*factors.last().unwrap() >= 1.0, "{factors:?}");
}

#[test]
fn forward_backward_collocation_round_trip() {
    let (g, op) = setup(128, 30.0);
    let u = gaussian(&g, 1.0, 2.0);
    let cfg = SimulationConfig::new(1.0, 9.0, 1e-3, 1.0);
    let fwd = solve_picard_between(&u, &op, &cfg, 0.0, 0.1).unwrap();
    let back = solve_picard_between(&fwd.state, &op, &cfg, 0.1, 0.0).unwrap();
    assert!(l2_diff(&back.state, &u) < 1e-9);
}

#[test]
fn linear_duhamel_single_mode_and_forcing() {
    let (g, op) = setup(128, 30.0);
    let e = op.eigenvector(2);
    let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
    let states = linear_duhamel(&op, &e, &times, None).unwrap();
    let mu = op.eigenvalues()[2];
    for (t, s) in times.iter().zip(&states) {
        let expected = e.scale(Complex64::from_polar(1.0, mu * t));
        assert!(l2_diff(s, &expected) < 1e-12);
    }
    // constant forcing h = e_k: u = ((e^{iμt} - 1)/μ) e_k from u0 = 0
    let h: Vec<RadialField> = times.iter().map(|_| e.clone()).collect();
    let states = linear_duhamel(&op, &RadialField::zeros(g.clone()), &times, Some(&h)).unwrap();
    let t = times[20];
    let expected = e.scale((Complex64::from_polar(1.0, mu * t) - 1.0) / mu);
    assert!(l2_diff(&states[20], &expected) < 1e-10);
}

#[test]
fn energy_of_gaussian_matches_closed_form() {
    let g = make_grid(5, 8.0, 8000).unwrap();
    let u = RadialField::from_real_fn(g.clone(), |r| (-r * r).exp()).unwrap();
    let zero = RadialField::zeros(g.clone());
    let e = energy(&u, &zero, 0.0, 9.0).unwrap();
    let exact = 0.5 * g.surface_constant() * 105.0 * (2.0 * std::f64::consts::PI).sqrt() / 64.0;
    assert!((e - exact).abs() / exact < 1e-6);
}
