use serde::Serialize;

use super::config::SimulationConfig;
use super::functionals::{boundary_mass, discrete_energy, discrete_mass, h2dot, mass};
use super::strang::{Forcing, StrangStepper};
use crate::error::{Error, Result};
use crate::radial::RadialField;
use crate::spectral::SpectralOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    BoundaryContaminated { time: f64, fraction: f64 },
    BlowUpSuspected { time: f64, growth: f64 },
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// Mass and energy in the operator weights (see [`discrete_mass`]).
    pub mass_series: Vec<f64>,
    pub energy_series: Vec<f64>,
    pub h2dot_series: Vec<f64>,
    pub boundary_mass_series: Vec<f64>,
    pub snapshots: Vec<(f64, RadialField)>,
    pub status: TrajectoryStatus,
    /// Step length actually used (tiles `[0, t_end]`).
    pub dt: f64,
}

impl TrajectoryRecord {
    fn max_relative_drift(series: &[f64]) -> f64 {
        let Some(&first) = series.first() else { return 0.0 };
        let scale = first.abs();
        if scale == 0.0 {
            return series.iter().fold(0.0, |a: f64, x| a.max(x.abs()));
        }
        series.iter().map(|x| (x - first).abs() / scale).fold(0.0, f64::max)
    }

    pub fn mass_drift(&self) -> f64 {
        Self::max_relative_drift(&self.mass_series)
    }

    pub fn energy_drift(&self) -> f64 {
        Self::max_relative_drift(&self.energy_series)
    }

    /// `sup_t ‖Δu(t)‖` over the recorded monitors.
    pub fn sup_h2dot_norm(&self) -> f64 {
        self.h2dot_series.iter().fold(0.0, |a: f64, x| a.max(x.sqrt()))
    }

    pub fn end_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn is_completed(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }
}

/// Advances `u0` to `cfg.t_end` by Strang splitting, recording monitors.
///
/// Boundary contamination and blow-up suspicion end the run early with a
/// status; the data recorded up to that point are kept.
pub fn run_trajectory(u0: &RadialField, op: &SpectralOperator, cfg: &SimulationConfig) -> Result<TrajectoryRecord> {
    run_inner(u0, op, cfg, None)
}

/// [`run_trajectory`] for `i ∂_t u + Hu + λ|u|^{p-1}u = e`.
pub fn run_forced_trajectory(
    u0: &RadialField,
    op: &SpectralOperator,
    cfg: &SimulationConfig,
    forcing: &Forcing<'_>,
) -> Result<TrajectoryRecord> {
    run_inner(u0, op, cfg, Some(forcing))
}

fn run_inner(
    u0: &RadialField,
    op: &SpectralOperator,
    cfg: &SimulationConfig,
    forcing: Option<&Forcing<'_>>,
) -> Result<TrajectoryRecord> {
    op.check_grid(u0)?;
    cfg.validate(op.grid().dimension())?;
    let (steps, dt) = cfg.steps();
    let stepper = StrangStepper::new(op, dt, cfg.lambda, cfg.p)?;
    let potential = op.potential_values();

    let m0 = mass(u0);
    let d0 = h2dot(u0).sqrt();
    let mut rec = TrajectoryRecord {
        times: Vec::new(),
        mass_series: Vec::new(),
        energy_series: Vec::new(),
        h2dot_series: Vec::new(),
        boundary_mass_series: Vec::new(),
        snapshots: Vec::new(),
        status: TrajectoryStatus::Completed,
        dt,
    };
    let record = |rec: &mut TrajectoryRecord, t: f64, u: &RadialField| -> Result<()> {
        rec.times.push(t);
        rec.mass_series.push(discrete_mass(u));
        rec.energy_series.push(discrete_energy(u, potential, cfg.lambda, cfg.p)?);
        rec.h2dot_series.push(h2dot(u));
        rec.boundary_mass_series.push(boundary_mass(u));
        Ok(())
    };
    record(&mut rec, 0.0, u0)?;
    if cfg.snapshot_stride > 0 {
        rec.snapshots.push((0.0, u0.clone()));
    }

    let mut values = u0.values().to_vec();
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * dt;
        let t = k as f64 * dt;
        let stepped = match forcing {
            Some(f) => stepper.step_forced(&mut values, t0, f),
            None => stepper.step(&mut values, t0),
        };
        if let Err(Error::BlowUp { time }) = stepped {
            rec.status = TrajectoryStatus::BlowUpSuspected { time, growth: f64::INFINITY };
            return Ok(rec);
        }
        stepped?;
        let u = match RadialField::new(u0.grid().clone(), values.clone()) {
            Ok(u) => u,
            Err(Error::NonFinite { .. }) => {
                rec.status = TrajectoryStatus::BlowUpSuspected { time: t, growth: f64::INFINITY };
                return Ok(rec);
            }
            Err(e) => return Err(e),
        };
        let fraction = if m0 > 0.0 { boundary_mass(&u) / m0 } else { 0.0 };
        let growth = if d0 > 0.0 { h2dot(&u).sqrt() / d0 } else { 0.0 };
        let halt = if fraction > cfg.boundary_threshold {
            Some(TrajectoryStatus::BoundaryContaminated { time: t, fraction })
        } else if growth > cfg.blowup_factor || !growth.is_finite() {
            Some(TrajectoryStatus::BlowUpSuspected { time: t, growth })
        } else {
            None
        };
        if k % cfg.monitor_stride == 0 || k == steps || halt.is_some() {
            record(&mut rec, t, &u)?;
        }
        if cfg.snapshot_stride > 0 && (k % cfg.snapshot_stride == 0 || k == steps) {
            rec.snapshots.push((t, u));
        }
        if let Some(status) = halt {
            rec.status = status;
            return Ok(rec);
        }
    }
    Ok(rec)
}
