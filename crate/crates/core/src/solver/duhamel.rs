//! Fixed-point solution of the Duhamel formula by Gauss collocation in the
//! interaction picture `a(t) = e^{-itH} u(t)` (in modal coordinates).
//!
//! For `u_t = iHu + iG(t, u)` the interaction variable obeys
//! `a' = i e^{-itμ} ĉ(G)`. The interval is tiled by windows of equal
//! length; on each window `a` is an 8-node Gauss collocation polynomial.
//! A sweep evaluates the source at every collocation node of the current
//! iterate and rebuilds the whole trajectory from the anchor. Gauss
//! collocation is symmetric, so integrating backward over the same tiling
//! inverts the forward map exactly.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::radial::RadialField;
use crate::spectral::SpectralOperator;

const STAGES: usize = 8;
/// States per batched transform; fixed so results do not depend on the thread count.
const CHUNK: usize = 32;

/// Nonlinear source `G(t, u)`, evaluated on node values.
pub type Source<'a> = dyn Fn(f64, &[Complex64]) -> Result<Vec<Complex64>> + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuhamelSettings {
    pub window: f64,
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone)]
pub struct FixedPointOutcome {
    /// `u` at the target time.
    pub state: RadialField,
    pub iterations: usize,
    /// Ratio of the last two successive-iterate distances (0 when the
    /// iteration stopped after one sweep).
    pub contraction_factor: f64,
    pub distance: f64,
    pub history: Vec<f64>,
}

struct Tableau {
    nodes: [f64; STAGES],
    weights: [f64; STAGES],
    /// `a[k][j] = ∫_0^{x_k} ℓ_j`
    a: [[f64; STAGES]; STAGES],
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`, ascending.
fn gauss_legendre() -> ([f64; STAGES], [f64; STAGES]) {
    let mut x = [0.0; STAGES];
    let mut w = [0.0; STAGES];
    for i in 0..STAGES {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (STAGES as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(STAGES, t);
            let dx = p / dp;
            t -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(STAGES, t);
        x[STAGES - 1 - i] = 0.5 * (1.0 + t);
        w[STAGES - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

impl Tableau {
    fn new() -> Self {
        let (nodes, weights) = gauss_legendre();
        let lagrange = |j: usize, x: f64| {
            (0..STAGES).filter(|&m| m != j).map(|m| (x - nodes[m]) / (nodes[j] - nodes[m])).product::<f64>()
        };
        let mut a = [[0.0; STAGES]; STAGES];
        for k in 0..STAGES {
            for (j, akj) in a[k].iter_mut().enumerate() {
                // exact: ℓ_j has degree 7
                *akj = (0..STAGES).map(|q| nodes[k] * weights[q] * lagrange(j, nodes[k] * nodes[q])).sum();
            }
        }
        Self { nodes, weights, a }
    }
}

/// Solves `u_t = iHu + iG(t, u)` between `t_anchor` (where `u = anchor`)
/// and `t_target`, in either time direction.
pub fn solve_duhamel(
    op: &SpectralOperator,
    anchor: &RadialField,
    t_anchor: f64,
    t_target: f64,
    settings: &DuhamelSettings,
    source: &Source<'_>,
) -> Result<FixedPointOutcome> {
    op.check_grid(anchor)?;
    if !(settings.window.is_finite() && settings.window > 0.0) {
        return Err(invalid("picard_window", "must be positive"));
    }
    if !(t_anchor.is_finite() && t_target.is_finite()) {
        return Err(invalid("T", "times must be finite"));
    }
    let forward = t_target >= t_anchor;
    let (t_lo, t_hi) = if forward { (t_anchor, t_target) } else { (t_target, t_anchor) };
    let length = t_hi - t_lo;
    let windows = ((length / settings.window) - 1e-9).ceil().max(1.0) as usize;
    let tau = length / windows as f64;
    let tab = Tableau::new();
    let mu = op.eigenvalues();
    let n = op.len();
    let scale = (op.grid().surface_constant() * op.grid().spacing()).sqrt();

    let times: Vec<f64> =
        (0..windows).flat_map(|m| tab.nodes.iter().map(move |x| t_lo + (m as f64 + x) * tau)).collect();

    let rotate = |c: &[Complex64], t: f64, sign: f64| -> Vec<Complex64> {
        c.iter().zip(mu).map(|(z, &m)| z * Complex64::from_polar(1.0, sign * t * m)).collect()
    };
    let anchor_a = rotate(&op.analyze(anchor)?, t_anchor, -1.0);
    let mut states: Vec<Vec<Complex64>> = vec![anchor_a.clone(); times.len()];

    let mut history = Vec::new();
    let mut rising = 0;
    for sweep in 1..=settings.max_iter {
        // F_j = i e^{-i s_j μ} ĉ(G(s_j, u(s_j)))
        let idx: Vec<usize> = (0..times.len()).collect();
        let forces: Vec<Vec<Complex64>> = idx
            .par_chunks(CHUNK)
            .map(|chunk| -> Result<Vec<Vec<Complex64>>> {
                let rotated: Vec<Vec<Complex64>> = chunk.iter().map(|&j| rotate(&states[j], times[j], 1.0)).collect();
                let refs: Vec<&[Complex64]> = rotated.iter().map(Vec::as_slice).collect();
                let nodal = op.synthesize_batch(&refs);
                let g: Vec<Vec<Complex64>> =
                    chunk.iter().zip(&nodal).map(|(&j, u)| source(times[j], u)).collect::<Result<_>>()?;
                let grefs: Vec<&[Complex64]> = g.iter().map(Vec::as_slice).collect();
                let coeffs = op.analyze_batch(&grefs);
                Ok(chunk
                    .iter()
                    .zip(coeffs)
                    .map(|(&j, c)| {
                        c.iter()
                            .zip(mu)
                            .map(|(z, &m)| Complex64::new(0.0, 1.0) * z * Complex64::from_polar(1.0, -times[j] * m))
                            .collect()
                    })
                    .collect())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();

        let mut next = vec![vec![Complex64::default(); n]; times.len()];
        let mut carry = anchor_a.clone();
        let order: Vec<usize> = if forward { (0..windows).collect() } else { (0..windows).rev().collect() };
        for m in order {
            let f = &forces[m * STAGES..(m + 1) * STAGES];
            for k in 0..STAGES {
                let coef: [f64; STAGES] = std::array::from_fn(|j| {
                    if forward {
                        tau * tab.a[k][j]
                    } else {
                        -tau * (tab.weights[j] - tab.a[k][j])
                    }
                });
                let slot = &mut next[m * STAGES + k];
                for i in 0..n {
                    let mut acc = carry[i];
                    for j in 0..STAGES {
                        acc += f[j][i] * coef[j];
                    }
                    slot[i] = acc;
                }
            }
            let step = if forward { tau } else { -tau };
            for i in 0..n {
                let mut acc = Complex64::default();
                for (fj, w) in f.iter().zip(&tab.weights) {
                    acc += fj[i] * w;
                }
                carry[i] += acc * step;
            }
        }

        let distance = states
            .iter()
            .zip(&next)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
            * scale;
        states = next;
        let previous = history.last().copied();
        history.push(distance);
        let factor = match previous {
            Some(prev) if prev > 0.0 => distance / prev,
            _ => 0.0,
        };
        if !distance.is_finite() {
            return Err(Error::NonContraction { factor: f64::INFINITY, iterations: sweep });
        }
        if distance < settings.tol {
            let state = op.synthesize(&rotate(&carry, t_target, 1.0))?;
            return Ok(FixedPointOutcome { state, iterations: sweep, contraction_factor: factor, distance, history });
        }
        rising = if matches!(previous, Some(prev) if distance > prev) { rising + 1 } else { 0 };
        if rising >= 3 {
            return Err(Error::NonContraction { factor, iterations: sweep });
        }
    }
    let k = history.len();
    let factor = if k >= 2 && history[k - 2] > 0.0 { history[k - 1] / history[k - 2] } else { 0.0 };
    Err(Error::NotConverged { distance: history[k - 1], iterations: k, factor })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_integrates_polynomials() {
        let tab = Tableau::new();
        let total: f64 = tab.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        for deg in 0..15 {
            let q: f64 = tab.nodes.iter().zip(&tab.weights).map(|(x, w)| w * x.powi(deg)).sum();
            assert!((q - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "degree {deg}");
        }
        for k in 0..STAGES {
            for deg in 0..STAGES as i32 {
                let lhs: f64 = (0..STAGES).map(|j| tab.a[k][j] * tab.nodes[j].powi(deg)).sum();
                let rhs = tab.nodes[k].powi(deg + 1) / (deg as f64 + 1.0);
                assert!((lhs - rhs).abs() < 1e-14);
            }
        }
    }
}
