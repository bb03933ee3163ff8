use serde::Serialize;

use super::spacetime::time_lq;
use crate::error::{invalid, Error, Result};
use crate::radial::RadialField;
use crate::solver::{critical_exponent, h2dot, sharp_exponent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MorawetzReport {
    pub k: f64,
    pub interval: (f64, f64),
    /// `K |I|^{1/4}`
    pub radius: f64,
    /// `∫_I ∫_{|x| ≤ K|I|^{1/4}} |u|^{2♯}/|x| dx dt`
    pub lhs: f64,
    /// `(K³ + K^{-1}) sup_I (ℰ + ℰ^{2♯/2}) |I|^{3/4}`
    pub rhs_core: f64,
    pub c_emp: f64,
}

/// Weighted space-time integral of the localized Morawetz estimate over the
/// span of `snapshots`.
pub fn morawetz_check(snapshots: &[(f64, RadialField)], k: f64, p: f64) -> Result<MorawetzReport> {
    if snapshots.len() < 4 {
        return Err(Error::TooFewSamples { got: snapshots.len(), need: 4 });
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(invalid("K", format!("must be positive, got {k}")));
    }
    let n = snapshots[0].1.grid().dimension();
    let critical = critical_exponent(n);
    if (p - critical).abs() >= 1e-12 {
        return Err(Error::NotCritical { p, critical });
    }
    let times: Vec<f64> = snapshots.iter().map(|s| s.0).collect();
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("times", "snapshots must be strictly increasing in time"));
    }
    let (a, b) = (times[0], times[times.len() - 1]);
    let length = b - a;
    let radius = k * length.powf(0.25);
    let sharp = sharp_exponent(n);

    let mut density = Vec::with_capacity(snapshots.len());
    let mut sup_hat = 0.0_f64;
    for (_, u) in snapshots {
        let grid = u.grid();
        density.push(grid.integrate(
            u.values()
                .iter()
                .zip(grid.nodes())
                .map(|(z, &r)| if r <= radius { z.norm().powf(sharp) / r } else { 0.0 }),
        ));
        let e = h2dot(u);
        sup_hat = sup_hat.max(e + e.powf(sharp / 2.0));
    }
    let lhs = time_lq(&times, &density, 1.0);
    let rhs_core = (k.powi(3) + 1.0 / k) * sup_hat * length.powf(0.75);
    let c_emp = if lhs == 0.0 { 0.0 } else { lhs / rhs_core };
    Ok(MorawetzReport { k, interval: (a, b), radius, lhs, rhs_core, c_emp })
}
