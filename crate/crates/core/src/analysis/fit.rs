use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::radial::{lp_norm, RadialField};
use crate::solver::{boundary_mass, mass};
use crate::spectral::SpectralOperator;

/// Least-squares line through `(x, y)`: `(slope, intercept, rms residual)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::TooFewSamples { got: x.len().min(y.len()), need: 2 });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("x", "abscissae are all equal"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok((slope, intercept, (rss / n).sqrt()))
}

/// Exponent `b` and amplitude `a` of `y ≈ a x^b` from a log-log fit.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(invalid("y", "power-law fit needs positive data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (b, c, res) = fit_line(&lx, &ly)?;
    Ok((b, c.exp(), res))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// Decay rate: `‖e^{itH}u₀‖_{L^p} ≈ amplitude · t^{-exponent}`.
    pub exponent: f64,
    pub amplitude: f64,
    pub residual: f64,
    pub window: (f64, f64),
    pub log_t: Vec<f64>,
    pub log_norm: Vec<f64>,
}

impl FitResult {
    pub fn fit_line(&self) -> Vec<f64> {
        self.log_t.iter().map(|lt| self.amplitude.ln() - self.exponent * lt).collect()
    }
}

/// `(n/4)(1 - 2/p)`.
pub fn predicted_decay_exponent(n: usize, p: f64) -> f64 {
    n as f64 / 4.0 * (1.0 - 2.0 / p)
}

/// Fits the decay of `‖e^{itH}u₀‖_{L^p}` over `samples` log-spaced times
/// of `window`, after normalizing `u₀` in `L^{p'}`.
pub fn fit_decay(
    op: &SpectralOperator,
    u0: &RadialField,
    p: f64,
    window: (f64, f64),
    samples: usize,
    boundary_threshold: f64,
) -> Result<FitResult> {
    if !(p >= 2.0) {
        return Err(invalid("p", format!("decay exponent needs p >= 2, got {p}")));
    }
    let (t0, t1) = window;
    if !(t0 > 0.0 && t1 > t0 && t1.is_finite()) {
        return Err(invalid("window", format!("need 0 < t0 < t1, got ({t0}, {t1})")));
    }
    if samples < 3 {
        return Err(Error::TooFewSamples { got: samples, need: 3 });
    }
    let dual = p / (p - 1.0);
    let norm = lp_norm(u0, dual)?;
    if norm == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let u0 = u0.scale_real(1.0 / norm);
    let m0 = mass(&u0);
    let ratio = (t1 / t0).ln() / (samples - 1) as f64;
    let times: Vec<f64> = (0..samples).map(|k| t0 * (ratio * k as f64).exp()).collect();
    let states = propagate_many(op, &u0, &times)?;

    let mut log_t = Vec::with_capacity(samples);
    let mut log_norm = Vec::with_capacity(samples);
    for (t, u) in times.iter().zip(&states) {
        let fraction = boundary_mass(u) / m0;
        if fraction > boundary_threshold {
            return Err(Error::WindowContaminated { time: *t, fraction });
        }
        log_t.push(t.ln());
        log_norm.push(lp_norm(u, p)?.ln());
    }
    let (slope, intercept, residual) = fit_line(&log_t, &log_norm)?;
    Ok(FitResult { exponent: -slope, amplitude: intercept.exp(), residual, window, log_t, log_norm })
}

/// `e^{itH}u` for every `t`, with one batched synthesis.
pub fn propagate_many(op: &SpectralOperator, u: &RadialField, times: &[f64]) -> Result<Vec<RadialField>> {
    use num_complex::Complex64;
    let c = op.analyze(u)?;
    let mu = op.eigenvalues();
    let rotated: Vec<Vec<Complex64>> = times
        .iter()
        .map(|&t| c.iter().zip(mu).map(|(z, &m)| z * Complex64::from_polar(1.0, t * m)).collect())
        .collect();
    let refs: Vec<&[Complex64]> = rotated.iter().map(Vec::as_slice).collect();
    op.synthesize_batch(&refs).into_iter().map(|v| RadialField::new(op.grid().clone(), v)).collect()
}

/// First time in `times` at which `e^{itH}u` carries more than `threshold`
/// of its mass in the boundary shell.
pub fn first_contamination(op: &SpectralOperator, u: &RadialField, times: &[f64], threshold: f64) -> Result<Option<f64>> {
    let m0 = mass(u);
    for (t, s) in times.iter().zip(propagate_many(op, u, times)?) {
        if boundary_mass(&s) > threshold * m0 {
            return Ok(Some(*t));
        }
    }
    Ok(None)
}
