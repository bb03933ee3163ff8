use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::radial::{lp_norm, RadialField};
use crate::spectral::{OperatorKind, SpectralFunction, SpectralOperator};

/// Fields sampled at strictly increasing times of an interval.
#[derive(Debug, Clone)]
pub struct SpaceTimeSample {
    times: Vec<f64>,
    fields: Vec<RadialField>,
    uniform: bool,
}

impl SpaceTimeSample {
    pub fn new(times: Vec<f64>, fields: Vec<RadialField>) -> Result<Self> {
        if times.len() != fields.len() {
            return Err(invalid("fields", format!("{} times but {} fields", times.len(), fields.len())));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("times", "must be finite and strictly increasing"));
        }
        if let Some(first) = fields.first() {
            for f in &fields[1..] {
                first.check_same_grid(f)?;
            }
        }
        let uniform = match times.len() {
            0..=2 => true,
            _ => {
                let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
                times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300))
            }
        };
        Ok(Self { times, fields, uniform })
    }

    pub fn from_snapshots(snapshots: &[(f64, RadialField)]) -> Result<Self> {
        Self::new(snapshots.iter().map(|s| s.0).collect(), snapshots.iter().map(|s| s.1.clone()).collect())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[RadialField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.times.first().copied().unwrap_or(0.0), self.times.last().copied().unwrap_or(0.0))
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Every other sample, starting with the first.
    pub fn coarsened(&self) -> Self {
        let keep: Vec<usize> = (0..self.len()).step_by(2).collect();
        Self::new(keep.iter().map(|&k| self.times[k]).collect(), keep.iter().map(|&k| self.fields[k].clone()).collect())
            .expect("subsample of a valid sample")
    }

    /// Samples whose time lies in `[a, b]`.
    pub fn restricted(&self, a: f64, b: f64) -> Result<Self> {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| self.times[k] >= a && self.times[k] <= b).collect();
        Self::new(keep.iter().map(|&k| self.times[k]).collect(), keep.iter().map(|&k| self.fields[k].clone()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    M,
    W,
    Z,
    N,
}

/// Spatial derivative taken before the Lebesgue norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    None,
    /// `|∇| = (Δ²)^{1/4}`
    Gradient,
    /// `|Δ| = (Δ²)^{1/2}`
    Laplacian,
}

impl NormKind {
    /// `(q, r, derivative)` for dimension `n`.
    pub fn exponents(self, n: usize) -> (f64, f64, Derivative) {
        let n = n as f64;
        let q = 2.0 * (n + 4.0) / (n - 4.0);
        match self {
            NormKind::M => (q, 2.0 * n * (n + 4.0) / (n * n + 16.0), Derivative::Laplacian),
            NormKind::W => (q, 2.0 * n * (n + 4.0) / (n * n - 2.0 * n + 8.0), Derivative::Gradient),
            NormKind::Z => (q, q, Derivative::None),
            NormKind::N => (2.0, 2.0 * n / (n + 2.0), Derivative::Gradient),
        }
    }
}

pub(crate) fn derivative_fields(
    fields: &[RadialField],
    derivative: Derivative,
    op_free: &SpectralOperator,
) -> Result<Vec<RadialField>> {
    let s = match derivative {
        Derivative::None => return Ok(fields.to_vec()),
        Derivative::Gradient => 1.0,
        Derivative::Laplacian => 2.0,
    };
    if op_free.kind() != OperatorKind::Free {
        return Err(invalid("op_free", "derivatives are taken with the free operator"));
    }
    for f in fields {
        op_free.check_grid(f)?;
    }
    let m = op_free.multipliers(SpectralFunction::Power(s))?;
    let refs: Vec<&[Complex64]> = fields.iter().map(|f| f.values()).collect();
    let mut coeffs = op_free.analyze_batch(&refs);
    for c in &mut coeffs {
        for (z, w) in c.iter_mut().zip(&m) {
            *z *= w;
        }
    }
    let crefs: Vec<&[Complex64]> = coeffs.iter().map(Vec::as_slice).collect();
    op_free
        .synthesize_batch(&crefs)
        .into_iter()
        .map(|v| RadialField::new(op_free.grid().clone(), v))
        .collect()
}

/// `(∫ f(t)^q dt)^{1/q}` by the trapezoid rule, scaled against overflow.
pub fn time_lq(times: &[f64], values: &[f64], q: f64) -> f64 {
    let max = values.iter().fold(0.0, |a: f64, &v| a.max(v));
    if max == 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return max;
    }
    let g: Vec<f64> = values.iter().map(|v| (v / max).powf(q)).collect();
    let integral: f64 = times.windows(2).zip(g.windows(2)).map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1])).sum();
    max * integral.powf(1.0 / q)
}

/// `‖D u‖_{L^q(I, L^r)}` by composite trapezoid in time.
pub fn mixed_norm(
    sample: &SpaceTimeSample,
    q: f64,
    r: f64,
    derivative: Derivative,
    op_free: &SpectralOperator,
) -> Result<f64> {
    if sample.len() < 4 {
        return Err(Error::TooFewSamples { got: sample.len(), need: 4 });
    }
    let d = derivative_fields(sample.fields(), derivative, op_free)?;
    let spatial: Vec<f64> = d.iter().map(|f| lp_norm(f, r)).collect::<Result<_>>()?;
    Ok(time_lq(sample.times(), &spatial, q))
}

pub fn spacetime_norm(sample: &SpaceTimeSample, which: NormKind, op_free: &SpectralOperator) -> Result<f64> {
    let n = op_free.grid().dimension();
    let (q, r, d) = which.exponents(n);
    mixed_norm(sample, q, r, d, op_free)
}

/// Relative change of a norm when every other time sample is dropped.
pub fn resolution_change(sample: &SpaceTimeSample, which: NormKind, op_free: &SpectralOperator) -> Result<f64> {
    let fine = spacetime_norm(sample, which, op_free)?;
    let coarse = spacetime_norm(&sample.coarsened(), which, op_free)?;
    if fine == 0.0 {
        return Ok(if coarse == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((fine - coarse).abs() / fine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_for_n5() {
        let (q, r, _) = NormKind::M.exponents(5);
        assert_eq!(q, 18.0);
        assert!((r - 90.0 / 41.0).abs() < 1e-15);
        let (_, r, _) = NormKind::W.exponents(5);
        assert!((r - 90.0 / 23.0).abs() < 1e-15);
        assert_eq!(NormKind::Z.exponents(5).1, 18.0);
        let (q, r, _) = NormKind::N.exponents(5);
        assert_eq!(q, 2.0);
        assert!((r - 10.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn constant_in_time() {
        let times = [0.0, 0.5, 1.0, 1.5, 2.0];
        let v = [3.0; 5];
        assert!((time_lq(&times, &v, 18.0) - 3.0 * 2f64.powf(1.0 / 18.0)).abs() < 1e-14);
    }
}
