use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::radial::{localized_mass, Cutoff, RadialField};
use crate::solver::{h2dot, mass};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizedMassReport {
    pub radius: f64,
    /// `sup_t |∂_t M(u(t), B(R))|`
    pub sup_rate: f64,
    /// `sup_t |∂_t M| R / (ℰ^{3/4} M(u, B)^{1/4})`
    pub empirical_constant: f64,
    /// `sup_rate · Δt / M(u)`, the rate in units of the total mass per sampling step.
    pub relative_rate: f64,
    /// Relative change of `sup_rate` when every other snapshot is dropped
    /// (`None` when both rates are below the zero floor).
    pub resolution_change: Option<f64>,
    pub times: Vec<f64>,
    pub rates: Vec<f64>,
}

/// Rates below `ZERO_FLOOR · M(u)/Δt` are treated as exact zeros.
pub const ZERO_FLOOR: f64 = 1e-8;

fn central_rates(times: &[f64], values: &[f64]) -> Vec<f64> {
    (1..times.len() - 1).map(|k| (values[k + 1] - values[k - 1]) / (times[k + 1] - times[k - 1])).collect()
}

pub fn localized_mass_rate_check(
    snapshots: &[(f64, RadialField)],
    radius: f64,
    chi: &Cutoff,
) -> Result<LocalizedMassReport> {
    if snapshots.len() < 3 {
        return Err(Error::TooFewSamples { got: snapshots.len(), need: 3 });
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("R", format!("radius must be positive, got {radius}")));
    }
    let times: Vec<f64> = snapshots.iter().map(|s| s.0).collect();
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("times", "snapshots must be strictly increasing in time"));
    }
    let local: Vec<f64> = snapshots.iter().map(|(_, u)| localized_mass(u, radius, chi)).collect::<Result<_>>()?;
    let rates = central_rates(&times, &local);

    let mut sup_rate = 0.0_f64;
    let mut constant = 0.0_f64;
    for (k, rate) in rates.iter().enumerate() {
        let u = &snapshots[k + 1].1;
        sup_rate = sup_rate.max(rate.abs());
        let denom = h2dot(u).powf(0.75) * local[k + 1].powf(0.25);
        if rate.abs() > 0.0 && denom > 0.0 {
            constant = constant.max(rate.abs() * radius / denom);
        }
    }

    let total = mass(&snapshots[0].1);
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let floor = ZERO_FLOOR * total / dt;
    let resolution_change = if snapshots.len() >= 5 {
        let ct: Vec<f64> = times.iter().step_by(2).copied().collect();
        let cl: Vec<f64> = local.iter().step_by(2).copied().collect();
        let coarse = central_rates(&ct, &cl).iter().fold(0.0, |a: f64, r| a.max(r.abs()));
        if sup_rate <= floor && coarse <= floor {
            None
        } else {
            let change = (sup_rate - coarse).abs() / sup_rate.max(coarse);
            if change > 0.5 {
                return Err(Error::UnderResolved { change: 100.0 * change });
            }
            Some(change)
        }
    } else {
        None
    };

    Ok(LocalizedMassReport {
        radius,
        sup_rate,
        empirical_constant: constant,
        relative_rate: if total > 0.0 { sup_rate * dt / total } else { 0.0 },
        resolution_change,
        times: times[1..times.len() - 1].to_vec(),
        rates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalizedMassSweep {
    pub reports: Vec<LocalizedMassReport>,
    /// Largest ratio (≥ 1) between the constants of consecutive radii.
    pub max_consecutive_ratio: f64,
}

pub fn localized_mass_sweep(
    snapshots: &[(f64, RadialField)],
    radii: &[f64],
    chi: &Cutoff,
) -> Result<LocalizedMassSweep> {
    let reports: Vec<LocalizedMassReport> =
        radii.iter().map(|&r| localized_mass_rate_check(snapshots, r, chi)).collect::<Result<_>>()?;
    let max_consecutive_ratio = reports
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].empirical_constant, w[1].empirical_constant);
            if a == 0.0 || b == 0.0 {
                f64::INFINITY
            } else {
                (a / b).max(b / a)
            }
        })
        .fold(1.0, f64::max);
    Ok(LocalizedMassSweep { reports, max_consecutive_ratio })
}
