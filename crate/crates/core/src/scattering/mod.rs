//! Wave operators, scattering states and the final-state problem.

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::{spacetime_norm, NormKind, SpaceTimeSample};
use crate::error::{invalid, Error, Result};
use crate::radial::{lp_norm, RadialField};
use crate::solver::{
    boundary_mass, energy_with, h2dot, mass, nonlinearity, sharp_exponent, solve_duhamel, FixedPointOutcome,
    SimulationConfig,
};
use crate::spectral::{apply_function, h2_norm, OperatorKind, SpectralFunction, SpectralOperator};

#[derive(Debug, Clone)]
pub struct WaveOperatorProbe {
    pub test_state: RadialField,
    pub times: Vec<f64>,
    /// `e^{itH} e^{-itΔ²} φ` at each time.
    pub series: Vec<RadialField>,
    /// `‖W(t_{k+1})φ - W(t_k)φ‖_{H²}`
    pub convergence_gaps: Vec<f64>,
    /// Boundary-shell mass fraction of `e^{-itΔ²}φ`.
    pub boundary_fractions: Vec<f64>,
}

impl WaveOperatorProbe {
    /// Gaps do not increase over the last three times (strictly decrease unless already zero).
    pub fn is_convergent(&self) -> bool {
        let g = &self.convergence_gaps;
        let tail = &g[g.len().saturating_sub(2)..];
        g.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
    }

    pub fn final_to_first_ratio(&self) -> f64 {
        match (self.convergence_gaps.first(), self.convergence_gaps.last()) {
            (Some(&a), Some(&b)) if a > 0.0 => b / a,
            _ => 0.0,
        }
    }
}

fn is_free(op: &SpectralOperator) -> bool {
    op.potential_values().iter().all(|&v| v == 0.0)
}

fn check_pair(op_full: &SpectralOperator, op_free: &SpectralOperator) -> Result<()> {
    if op_free.kind() != OperatorKind::Free {
        return Err(invalid("op_free", "expected the free operator"));
    }
    if !op_full.grid().same_as(op_free.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `e^{itH} e^{-itΔ²}` applied to `u`.
pub fn wave_composition(op_full: &SpectralOperator, op_free: &SpectralOperator, t: f64, u: &RadialField) -> Result<RadialField> {
    if t == 0.0 || is_free(op_full) {
        op_full.check_grid(u)?;
        return Ok(u.clone());
    }
    let free = apply_function(op_free, SpectralFunction::ExpIt(-t), u)?;
    apply_function(op_full, SpectralFunction::ExpIt(t), &free)
}

/// `e^{-itΔ²} e^{itH}` applied to `u` (adjoint of [`wave_composition`]).
pub fn wave_composition_adjoint(
    op_full: &SpectralOperator,
    op_free: &SpectralOperator,
    t: f64,
    u: &RadialField,
) -> Result<RadialField> {
    if t == 0.0 || is_free(op_full) {
        op_full.check_grid(u)?;
        return Ok(u.clone());
    }
    let full = apply_function(op_full, SpectralFunction::ExpIt(t), u)?;
    apply_function(op_free, SpectralFunction::ExpIt(-t), &full)
}

pub fn probe_wave_operator(
    op_full: &SpectralOperator,
    op_free: &SpectralOperator,
    test_state: &RadialField,
    times: &[f64],
    boundary_threshold: f64,
) -> Result<WaveOperatorProbe> {
    check_pair(op_full, op_free)?;
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("times", "must be finite and increasing"));
    }
    let m0 = mass(test_state);
    if m0 == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let mut series = Vec::with_capacity(times.len());
    let mut boundary_fractions = Vec::with_capacity(times.len());
    for &t in times {
        let free = apply_function(op_free, SpectralFunction::ExpIt(-t), test_state)?;
        let fraction = boundary_mass(&free) / m0;
        if fraction > boundary_threshold {
            return Err(Error::WindowContaminated { time: t, fraction });
        }
        boundary_fractions.push(fraction);
        series.push(wave_composition(op_full, op_free, t, test_state)?);
    }
    let convergence_gaps =
        series.windows(2).map(|w| h2_norm(&w[1].sub(&w[0])?)).collect::<Result<Vec<f64>>>()?;
    Ok(WaveOperatorProbe { test_state: test_state.clone(), times: times.to_vec(), series, convergence_gaps, boundary_fractions })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyGap {
    pub t1: f64,
    pub t2: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatteringStatus {
    Scattered,
    NotYetScattered,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatteringReport {
    /// `‖v(t₁) - v(t₂)‖_{H²}` along the chain, `v(t) = e^{-itH}u(t)`.
    pub cauchy_series: Vec<CauchyGap>,
    #[serde(skip)]
    pub u_plus: RadialField,
    #[serde(skip)]
    pub u_plus_star: RadialField,
    pub u_plus_time: f64,
    pub mass_identity_gap: f64,
    /// `|2E(u₀) - ‖u⁺_*‖²_{Ḣ²}| / 2E(u₀)` at the last chain time.
    pub energy_identity_gap: f64,
    pub energy_gap_series: Vec<(f64, f64)>,
    /// First snapshot time with `‖u(t)‖_{L^{2♯}} <= 0.1 ‖u₀‖_{L^{2♯}}`.
    pub trigger_time: Option<f64>,
    pub lsharp_series: Vec<(f64, f64)>,
    /// `‖u‖_{Z([t_z, T])}`
    pub z_tail: f64,
    pub z_tail_start: f64,
    /// `‖u(t) - e^{itΔ²}u⁺_*‖_{H²}`
    pub free_comparison_series: Vec<(f64, f64)>,
    pub status: ScatteringStatus,
}

/// Threshold for the Z-norm tail in the scattered verdict.
pub const Z_TAIL_THRESHOLD: f64 = 1e-3;

fn find_snapshot(snapshots: &[(f64, RadialField)], t: f64) -> Result<&RadialField> {
    snapshots
        .iter()
        .find(|(s, _)| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
        .map(|(_, u)| u)
        .ok_or_else(|| invalid("chain", format!("no snapshot at t = {t}")))
}

/// Builds the scattering record of a trajectory from its snapshots, the first
/// of which must be the initial datum. `chain` selects the times entering the
/// Cauchy series (all snapshots when empty).
pub fn extract_scattering_state(
    snapshots: &[(f64, RadialField)],
    chain: &[f64],
    op_full: &SpectralOperator,
    op_free: &SpectralOperator,
    lambda: f64,
    p: f64,
) -> Result<ScatteringReport> {
    check_pair(op_full, op_free)?;
    if snapshots.len() < 4 {
        return Err(Error::TooFewSamples { got: snapshots.len(), need: 4 });
    }
    let chain: Vec<f64> = if chain.is_empty() { snapshots.iter().map(|s| s.0).collect() } else { chain.to_vec() };
    if chain.len() < 2 || chain.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("chain", "need at least two increasing chain times"));
    }
    let (t_start, u0) = (&snapshots[0].0, &snapshots[0].1);
    let potential = op_full.potential_values();
    let two_e = 2.0 * energy_with(u0, potential, lambda, p)?;
    let m0 = mass(u0);

    let states: Vec<&RadialField> = chain.iter().map(|&t| find_snapshot(snapshots, t)).collect::<Result<_>>()?;
    let v: Vec<RadialField> = chain
        .iter()
        .zip(&states)
        .map(|(&t, u)| apply_function(op_full, SpectralFunction::ExpIt(-(t - t_start)), u))
        .collect::<Result<_>>()?;
    let cauchy_series = chain
        .windows(2)
        .zip(v.windows(2))
        .map(|(t, w)| Ok(CauchyGap { t1: t[0], t2: t[1], gap: h2_norm(&w[1].sub(&w[0])?)? }))
        .collect::<Result<Vec<_>>>()?;

    let energy_gap_series = chain
        .iter()
        .zip(&states)
        .map(|(&t, u)| {
            let star = apply_function(op_free, SpectralFunction::ExpIt(-(t - t_start)), u)?;
            Ok((t, ((two_e - h2dot(&star)) / two_e).abs()))
        })
        .collect::<Result<Vec<_>>>()?;

    let last_t = *chain.last().expect("non-empty chain");
    let u_plus = v.last().expect("non-empty chain").clone();
    let u_plus_star = wave_composition_adjoint(op_full, op_free, last_t - t_start, &u_plus)?;
    let mass_identity_gap = (m0 - mass(&u_plus)).abs() / m0;
    let energy_identity_gap = energy_gap_series.last().map_or(0.0, |g| g.1);

    let sharp = sharp_exponent(op_full.grid().dimension());
    let l0 = lp_norm(u0, sharp)?;
    let lsharp_series: Vec<(f64, f64)> =
        snapshots.iter().map(|(t, u)| Ok((*t, lp_norm(u, sharp)?))).collect::<Result<_>>()?;
    let trigger_time = lsharp_series.iter().find(|(_, l)| *l <= 0.1 * l0).map(|(t, _)| *t);

    let free_comparison_series = chain
        .iter()
        .zip(&states)
        .map(|(&t, u)| {
            let free = apply_function(op_free, SpectralFunction::ExpIt(t - t_start), &u_plus_star)?;
            Ok((t, h2_norm(&u.sub(&free)?)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let z_tail_start = if chain.len() >= 4 { chain[chain.len() - 4] } else { 0.5 * (t_start + last_t) };
    let dense = SpaceTimeSample::from_snapshots(snapshots)?.restricted(z_tail_start, last_t)?;
    let z_tail = spacetime_norm(&dense, NormKind::Z, op_free)?;

    let gaps: Vec<f64> = cauchy_series.iter().map(|g| g.gap).collect();
    let decreasing = gaps.len() >= 3 && gaps[gaps.len() - 3..].windows(2).all(|w| w[1] < w[0]);
    let status =
        if decreasing && z_tail < Z_TAIL_THRESHOLD { ScatteringStatus::Scattered } else { ScatteringStatus::NotYetScattered };

    Ok(ScatteringReport {
        cauchy_series,
        u_plus,
        u_plus_star,
        u_plus_time: last_t,
        mass_identity_gap,
        energy_identity_gap,
        energy_gap_series,
        trigger_time,
        lsharp_series,
        z_tail,
        z_tail_start,
        free_comparison_series,
        status,
    })
}

/// Solution of the final-state problem at `t_start`: the fixed point of
/// `u(t) = e^{itH}u⁺ - iλ∫_t^{T_max} e^{i(t-s)H}|u|^{p-1}u ds`.
pub fn solve_final_state(
    u_plus: &RadialField,
    op_full: &SpectralOperator,
    cfg: &SimulationConfig,
    t_start: f64,
    t_max: f64,
) -> Result<FixedPointOutcome> {
    if !(t_start < t_max) {
        return Err(invalid("T_start", format!("must precede T_max = {t_max}, got {t_start}")));
    }
    let anchor = apply_function(op_full, SpectralFunction::ExpIt(t_max), u_plus)?;
    let (lambda, p) = (cfg.lambda, cfg.p);
    let source = move |t: f64, u: &[Complex64]| nonlinearity(u, lambda, p, t);
    solve_duhamel(op_full, &anchor, t_max, t_start, &cfg.duhamel_settings(), &source)
}

#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub backward: FixedPointOutcome,
    pub forward: FixedPointOutcome,
    pub u_plus_new: RadialField,
    /// `‖u⁺_new - u⁺‖_{H²}`
    pub h2_gap: f64,
}

/// Backward solve from `u⁺`, forward re-evolution with the same collocation,
/// and re-extraction `e^{-iT_max H}u(T_max)`.
pub fn final_state_round_trip(
    u_plus: &RadialField,
    op_full: &SpectralOperator,
    cfg: &SimulationConfig,
    t_start: f64,
    t_max: f64,
) -> Result<RoundTrip> {
    let backward = solve_final_state(u_plus, op_full, cfg, t_start, t_max)?;
    let (lambda, p) = (cfg.lambda, cfg.p);
    let source = move |t: f64, u: &[Complex64]| nonlinearity(u, lambda, p, t);
    let forward = solve_duhamel(op_full, &backward.state, t_start, t_max, &cfg.duhamel_settings(), &source)?;
    let u_plus_new = apply_function(op_full, SpectralFunction::ExpIt(-t_max), &forward.state)?;
    let h2_gap = h2_norm(&u_plus_new.sub(u_plus)?)?;
    Ok(RoundTrip { backward, forward, u_plus_new, h2_gap })
}
