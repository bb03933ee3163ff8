use std::sync::{Arc, LazyLock};

use nls4::analysis::*;
use nls4::potentials::PotentialSpec;
use nls4::radial::{lp_norm, make_grid, weak_lp_norm, Cutoff, RadialField, RadialGrid};
use nls4::scattering::{extract_scattering_state, probe_wave_operator};
use nls4::spectral::{apply_function, build_operator, OperatorKind, SpectralFunction, SpectralOperator};
use num_complex::Complex64;
use proptest::prelude::*;

struct Ops {
    grid: Arc<RadialGrid>,
    full: SpectralOperator,
    free: SpectralOperator,
}

static OPS: LazyLock<Ops> = LazyLock::new(|| {
    let grid = make_grid(5, 20.0, 128).unwrap();
    let spec = PotentialSpec::inverse_bracket(5, 0.01, 10.0).unwrap();
    let full = build_operator(OperatorKind::Full, &grid, Some(&spec)).unwrap();
    let free = build_operator(OperatorKind::Free, &grid, None).unwrap();
    Ops { grid, full, free }
});

fn packet(g: &Arc<RadialGrid>, amp: f64, sigma: f64, k: f64) -> RadialField {
    RadialField::from_fn(g.clone(), |r| Complex64::from_polar(amp * (-r * r / (2.0 * sigma * sigma)).exp(), k * r))
        .unwrap()
}

fn snapshots(op: &SpectralOperator, u: &RadialField, times: &[f64]) -> Vec<(f64, RadialField)> {
    times.iter().map(|&t| (t, apply_function(op, SpectralFunction::ExpIt(t), u).unwrap())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lp_norm_is_homogeneous(amp in 0.1f64..5.0, sigma in 0.5f64..4.0, c in -10.0f64..10.0, p in 1.0f64..12.0) {
        let u = packet(&OPS.grid, amp, sigma, 0.0);
        let lhs = lp_norm(&u.scale_real(c), p).unwrap();
        let rhs = c.abs() * lp_norm(&u, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn weak_norm_is_dominated(amp in 0.1f64..5.0, sigma in 0.5f64..4.0, r in 1.1f64..6.0) {
        let u = packet(&OPS.grid, amp, sigma, 1.0);
        prop_assert!(weak_lp_norm(&u, r).unwrap() <= lp_norm(&u, r).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn sobolev_ratio_is_scale_free(c in 0.01f64..100.0, s in 0.0f64..2.0, p in 1.2f64..2.4) {
        let u = packet(&OPS.grid, 1.0, 1.5, 0.5);
        let a = sobolev_equiv_ratio(&OPS.full, &OPS.free, &u, s, p).unwrap();
        let b = sobolev_equiv_ratio(&OPS.full, &OPS.free, &u.scale_real(c), s, p).unwrap();
        prop_assert!((a - b).abs() < 1e-10 * a);
        prop_assert!((0.5..=2.0).contains(&a));
    }

    #[test]
    fn morawetz_lhs_grows_with_radius(k1 in 0.2f64..4.0, k2 in 0.2f64..4.0) {
        let u = packet(&OPS.grid, 0.5, 2.0, 0.0);
        let times: Vec<f64> = (0..9).map(|j| j as f64 * 0.125).collect();
        let snaps = snapshots(&OPS.full, &u, &times);
        let (lo, hi) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
        let a = morawetz_check(&snaps, lo, 9.0).unwrap();
        let b = morawetz_check(&snaps, hi, 9.0).unwrap();
        prop_assert!(a.lhs <= b.lhs);
        prop_assert!(a.radius <= b.radius);
    }

    #[test]
    fn admissible_pairs_come_from_the_identity(num in 1i64..20) {
        // r ranges over (2, 5/2); q follows from 4/q = 5/2 - 5/r
        let r = num_rational::Ratio::new(2 * 40 + num, 40);
        let q = num_rational::Ratio::from_integer(4) / (num_rational::Ratio::new(5, 2) - num_rational::Ratio::from_integer(5) / r);
        let pair = AdmissiblePair::new(q, r, 5).unwrap();
        prop_assert!((4.0 / pair.q() + 5.0 / pair.r() - 2.5).abs() < 1e-12);
    }
}

#[test]
fn morawetz_rejects_noncritical_power() {
    let u = packet(&OPS.grid, 0.5, 2.0, 0.0);
    let snaps = snapshots(&OPS.full, &u, &[0.0, 0.1, 0.2, 0.3]);
    assert!(matches!(morawetz_check(&snaps, 1.0, 3.0), Err(nls4::Error::NotCritical { .. })));
}

#[test]
fn localized_mass_of_stationary_mode_is_still() {
    let mode = OPS.full.eigenvector(0);
    let times: Vec<f64> = (0..11).map(|j| j as f64 * 0.1).collect();
    let snaps = snapshots(&OPS.full, &mode, &times);
    let report = localized_mass_rate_check(&snaps, 4.0, &Cutoff::default()).unwrap();
    assert!(report.relative_rate < ZERO_FLOOR, "{}", report.relative_rate);
}

#[test]
fn free_wave_operator_is_identity() {
    let u = packet(&OPS.grid, 1.0, 1.0, 0.0);
    let probe = probe_wave_operator(&OPS.free, &OPS.free, &u, &[0.5, 1.0, 2.0], 1.0).unwrap();
    assert!(probe.convergence_gaps.iter().all(|&g| g == 0.0));
    assert!(probe.is_convergent());
    assert_eq!(probe.final_to_first_ratio(), 0.0);
}

#[test]
fn linear_flow_scatters_to_its_datum() {
    let u = packet(&OPS.grid, 1.0, 1.0, 0.0);
    let snaps = snapshots(&OPS.full, &u, &[0.0, 0.1, 0.2, 0.3, 0.4]);
    let report = extract_scattering_state(&snaps, &[], &OPS.full, &OPS.free, 0.0, 9.0).unwrap();
    assert!(report.cauchy_series.iter().all(|g| g.gap < 1e-9));
    assert!(report.mass_identity_gap < 1e-12);
    assert!(lp_norm(&report.u_plus.sub(&u).unwrap(), 2.0).unwrap() < 1e-10);
}

#[test]
fn scattering_requires_the_free_operator() {
    let u = packet(&OPS.grid, 1.0, 1.0, 0.0);
    let snaps = snapshots(&OPS.full, &u, &[0.0, 0.1, 0.2, 0.3]);
    assert!(extract_scattering_state(&snaps, &[], &OPS.full, &OPS.full, 1.0, 9.0).is_err());
}

#[test]
fn power_law_fit_recovers_exponent() {
    let x: Vec<f64> = (1..20).map(|k| k as f64).collect();
    let y: Vec<f64> = x.iter().map(|t| 3.0 * t.powf(-1.25)).collect();
    let (slope, intercept, residual) = fit_power_law(&x, &y).unwrap();
    assert!((slope + 1.25).abs() < 1e-12);
    assert!((intercept - 3.0).abs() < 1e-12);
    assert!(residual < 1e-12);
}

#[test]
fn time_norm_of_constant() {
    let t: Vec<f64> = (0..=10).map(|k| k as f64 * 0.2).collect();
    let v = vec![3.0; t.len()];
    assert!((time_lq(&t, &v, 2.0) - 3.0 * 2f64.sqrt()).abs() < 1e-12);
}
