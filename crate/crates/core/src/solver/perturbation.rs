use num_complex::Complex64;
use serde::Serialize;

use super::config::SimulationConfig;
use super::linear_duhamel;
use super::strang::Forcing;
use super::trajectory::{run_forced_trajectory, run_trajectory, TrajectoryRecord};
use crate::analysis::{spacetime_norm, NormKind, SpaceTimeSample};
use crate::error::{invalid, Error, Result};
use crate::radial::RadialField;
use crate::spectral::{h2dot_norm, SpectralOperator};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    /// `‖u - ũ‖_{W(I)}`
    pub w_distance: f64,
    /// `‖u₀ - ũ(0)‖_{Ḣ²}`
    pub data_gap: f64,
    /// `‖e^{itH}(u₀ - ũ(0))‖_{W(I)}`
    pub linear_gap: f64,
    /// `‖e‖_{N(I)}`
    pub forcing_norm: f64,
    /// `max(linear_gap, forcing_norm)`
    pub epsilon: f64,
    /// `15/(n-4)³`
    pub theory_exponent: f64,
    /// `ε + ε^{15/(n-4)³}`
    pub bound_shape: f64,
    /// `w_distance / bound_shape` (0 when both vanish).
    pub empirical_constant: f64,
}

/// Compares the solution `u` of the equation with data `u₀` against the
/// approximate solution `ũ` of the forced equation `i∂ₜũ + Hũ + λ|ũ|^{p-1}ũ = e`
/// over `I = [0, cfg.t_end]`, using the monitored snapshots of both runs.
pub fn perturbation_experiment(
    u_tilde0: &RadialField,
    u0: &RadialField,
    forcing: Option<&Forcing<'_>>,
    op_full: &SpectralOperator,
    op_free: &SpectralOperator,
    cfg: &SimulationConfig,
) -> Result<PerturbationReport> {
    u_tilde0.check_same_grid(u0)?;
    op_full.check_grid(u0)?;
    if cfg.snapshot_stride == 0 {
        return Err(invalid("snapshot_stride", "the perturbation experiment needs snapshots"));
    }
    let approx = match forcing {
        Some(f) => run_forced_trajectory(u_tilde0, op_full, cfg, f)?,
        None => run_trajectory(u_tilde0, op_full, cfg)?,
    };
    let exact = run_trajectory(u0, op_full, cfg)?;
    for rec in [&approx, &exact] {
        if !rec.is_completed() {
            return Err(incomplete(rec));
        }
    }
    let times: Vec<f64> = exact.snapshots.iter().map(|s| s.0).collect();
    let diff: Vec<RadialField> = exact
        .snapshots
        .iter()
        .zip(&approx.snapshots)
        .map(|((_, a), (_, b))| a.sub(b))
        .collect::<Result<_>>()?;
    let w_distance = spacetime_norm(&SpaceTimeSample::new(times.clone(), diff)?, NormKind::W, op_free)?;

    let gap = u0.sub(u_tilde0)?;
    let data_gap = h2dot_norm(&gap)?;
    let linear = linear_duhamel(op_full, &gap, &times, None)?;
    let linear_gap = spacetime_norm(&SpaceTimeSample::new(times.clone(), linear)?, NormKind::W, op_free)?;

    let forcing_norm = match forcing {
        Some(f) => {
            let samples: Vec<RadialField> = times
                .iter()
                .map(|&t| RadialField::new(u0.grid().clone(), f(t)))
                .collect::<Result<_>>()?;
            spacetime_norm(&SpaceTimeSample::new(times.clone(), samples)?, NormKind::N, op_free)?
        }
        None => 0.0,
    };

    let n = op_full.grid().dimension() as f64;
    let theory_exponent = 15.0 / (n - 4.0).powi(3);
    let epsilon = linear_gap.max(forcing_norm);
    let bound_shape = epsilon + epsilon.powf(theory_exponent);
    let empirical_constant = if bound_shape > 0.0 { w_distance / bound_shape } else { 0.0 };
    Ok(PerturbationReport {
        w_distance,
        data_gap,
        linear_gap,
        forcing_norm,
        epsilon,
        theory_exponent,
        bound_shape,
        empirical_constant,
    })
}

fn incomplete(rec: &TrajectoryRecord) -> Error {
    match rec.status {
        super::TrajectoryStatus::BoundaryContaminated { time, fraction } => Error::WindowContaminated { time, fraction },
        super::TrajectoryStatus::BlowUpSuspected { time, .. } => Error::BlowUp { time },
        super::TrajectoryStatus::Completed => unreachable!("completed runs are not errors"),
    }
}

/// `e(t, r) = envelope(t) · profile(r)` as a forcing closure.
pub fn separable_forcing(profile: &RadialField, envelope: impl Fn(f64) -> f64 + Sync) -> impl Fn(f64) -> Vec<Complex64> + Sync {
    let values = profile.values().to_vec();
    move |t| {
        let a = envelope(t);
        values.iter().map(|z| z * a).collect()
    }
}
