use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

/// Smallest admissible number of interior nodes.
pub const MIN_POINTS: usize = 16;

/// Construction switches for [`RadialGrid`].
#[derive(Debug, Clone, Copy, Default)]
pub struct GridOptions {
    /// Permit `1 <= n < 5` (debugging only; the equation is studied for n >= 5).
    pub allow_low_dimension: bool,
}

/// Uniform radial grid `r_j = j h`, `h = r_max / (N + 1)`, with Dirichlet
/// conditions at `r = r_max`.
///
/// Two weight vectors are kept. `measure_weights` are the plain
/// `h r_j^{n-1}` weights under which the discrete operators are symmetric;
/// `quad_weights` agree with them except on a handful of nodes next to
/// `r_max`, where they are corrected so that `sum_j w_j r_j^k` reproduces
/// `r_max^{n+k}/(n+k)` exactly for `k = 0..=4`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dimension: usize,
    r_max: f64,
    spacing: f64,
    nodes: Vec<f64>,
    quad_weights: Vec<f64>,
    measure_weights: Vec<f64>,
    surface_constant: f64,
}

/// Builds a grid with the default options (n >= 5 enforced).
pub fn make_grid(n: usize, r_max: f64, points: usize) -> Result<Arc<RadialGrid>> {
    RadialGrid::new(n, r_max, points, GridOptions::default()).map(Arc::new)
}

impl RadialGrid {
    pub fn new(n: usize, r_max: f64, points: usize, opts: GridOptions) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "dimension must be positive"));
        }
        if n < 5 && !opts.allow_low_dimension {
            return Err(Error::DimensionBelowFive { n });
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(invalid("r_max", format!("must be positive and finite, got {r_max}")));
        }
        if points < MIN_POINTS {
            return Err(Error::TooFewPoints { got: points, min: MIN_POINTS });
        }
        let h = r_max / (points as f64 + 1.0);
        let nodes: Vec<f64> = (1..=points).map(|j| j as f64 * h).collect();
        let measure_weights: Vec<f64> = nodes.iter().map(|&r| h * r.powi(n as i32 - 1)).collect();
        let quad_weights = corrected_weights(n, r_max, h, &nodes, &measure_weights)?;
        Ok(Self {
            dimension: n,
            r_max,
            spacing: h,
            nodes,
            quad_weights,
            measure_weights,
            surface_constant: unit_sphere_area(n),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights for `∫_0^{r_max} f(r) r^{n-1} dr` (without the sphere area).
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    /// The uncorrected `h r_j^{n-1}` weights of the operator inner product.
    pub fn measure_weights(&self) -> &[f64] {
        &self.measure_weights
    }

    /// Area of the unit sphere in R^n, `2 π^{n/2} / Γ(n/2)`.
    pub fn surface_constant(&self) -> f64 {
        self.surface_constant
    }

    /// `∫_{R^n} f(|x|) dx` by quadrature over the nodes.
    pub fn integrate(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        self.surface_constant
            * values
                .into_iter()
                .zip(&self.quad_weights)
                .map(|(f, w)| f * w)
                .sum::<f64>()
    }

    /// `∫ f dx` with the operator weights `h r^{n-1}`, the inner product the
    /// discrete propagators conserve.
    pub fn integrate_measure(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        self.surface_constant
            * values
                .into_iter()
                .zip(&self.measure_weights)
                .map(|(f, w)| f * w)
                .sum::<f64>()
    }

    /// Same grid parameters (dimension, radius, node count).
    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.dimension == other.dimension
            && self.nodes.len() == other.nodes.len()
            && self.r_max == other.r_max
    }
}

/// Area of the unit sphere `S^{n-1}`.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Γ(n/2) for a positive integer n, from the factorial recursions.
fn gamma_half(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        // Γ(k + 1/2) = (k - 1/2)(k - 3/2)...(1/2) √π
        let k = (n - 1) / 2;
        (0..k).map(|j| j as f64 + 0.5).product::<f64>() * PI.sqrt()
    }
}

const MOMENTS: usize = 5;

/// Corrects the trailing weights so that the rule integrates
/// `r^{n-1} q(r)` exactly for every polynomial `q` of degree < 5.
///
/// The correction is the minimum-norm relative change over the last `m`
/// nodes; `m` grows until every weight stays positive.
fn corrected_weights(n: usize, r_max: f64, h: f64, nodes: &[f64], base: &[f64]) -> Result<Vec<f64>> {
    let total = nodes.len();
    let mut widths: Vec<usize> = vec![8, 12, 16, 24, 32, 48, 64];
    widths.retain(|&m| m < total);
    widths.push(total);

    for m in widths {
        let scale = h * m as f64;
        let basis = |r: f64, q: usize| ((r - r_max) / scale).powi(q as i32);
        let first = total - m;

        let mut rhs = DVector::<f64>::zeros(MOMENTS);
        for q in 0..MOMENTS {
            let exact = shifted_moment(n, q, r_max, scale);
            let approx: f64 = nodes.iter().zip(base).map(|(&r, &w)| w * basis(r, q)).sum();
            rhs[q] = exact - approx;
        }
        let mut a = DMatrix::<f64>::zeros(MOMENTS, m);
        for q in 0..MOMENTS {
            for i in 0..m {
                let j = first + i;
                a[(q, i)] = base[j] * basis(nodes[j], q);
            }
        }
        let Ok(rel) = a.svd(true, true).solve(&rhs, 1e-14) else {
            continue;
        };
        let mut weights = base.to_vec();
        for i in 0..m {
            weights[first + i] *= 1.0 + rel[i];
        }
        if weights.iter().all(|&w| w > 0.0 && w.is_finite()) {
            return Ok(weights);
        }
    }
    Err(Error::Quadrature { n, points: total })
}

/// `∫_0^R r^{n-1} ((r - R)/s)^q dr = (-1)^q (R/s)^q R^n (n-1)! q! / (n+q)!`.
fn shifted_moment(n: usize, q: usize, r_max: f64, scale: f64) -> f64 {
    let sign = if q.is_multiple_of(2) { 1.0 } else { -1.0 };
    // (n-1)! q! / (n+q)! = 1 / (n * C(n+q, q)) computed as a running product.
    let mut beta = 1.0 / n as f64;
    for k in 1..=q {
        beta *= k as f64 / (n + k) as f64;
    }
    sign * (r_max / scale).powi(q as i32) * r_max.powi(n as i32) * beta
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, r_max: f64, points: usize) -> RadialGrid {
        RadialGrid::new(n, r_max, points, GridOptions::default()).unwrap()
    }

    #[test]
    fn sphere_area_closed_forms() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        let s4 = 8.0 * PI * PI / 3.0;
        assert!((unit_sphere_area(5) - s4).abs() / s4 < 1e-12);
        assert!((unit_sphere_area(5) - 26.318945069).abs() < 1e-8);
        // S^5: π^3
        assert!((unit_sphere_area(6) - PI.powi(3)).abs() / PI.powi(3) < 1e-12);
    }

    #[test]
    fn example_grid_shape() {
        let g = make_grid(5, 20.0, 256).unwrap();
        assert_eq!(g.len(), 256);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes()[0] > 0.0 && *g.nodes().last().unwrap() < 20.0);
        assert!(g.quad_weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(make_grid(5, 20.0, 8), Err(Error::TooFewPoints { got: 8, .. })));
        assert!(matches!(make_grid(4, 20.0, 256), Err(Error::DimensionBelowFive { n: 4 })));
        assert!(make_grid(0, 20.0, 256).is_err());
        assert!(make_grid(5, 0.0, 256).is_err());
        assert!(make_grid(5, -1.0, 256).is_err());
        let low = RadialGrid::new(3, 10.0, 64, GridOptions { allow_low_dimension: true });
        assert!(low.is_ok());
    }

    #[test]
    fn monomial_exactness() {
        for &(n, r_max, points) in &[(5, 20.0, 256), (5, 400.0, 800), (6, 3.0, 40), (7, 10.0, 100), (9, 30.0, 64)] {
            let g = grid(n, r_max, points);
            for k in 0..=4 {
                let exact = r_max.powi((n + k) as i32) / (n + k) as f64;
                let approx: f64 = g.nodes().iter().zip(g.quad_weights()).map(|(r, w)| w * r.powi(k as i32)).sum();
                let rel = (approx - exact).abs() / exact;
                assert!(rel <= 1e-10, "n={n} N={points} k={k}: rel err {rel:e}");
            }
        }
    }

    #[test]
    fn correction_is_confined_to_the_outer_edge() {
        let g = grid(5, 40.0, 512);
        let changed = g
            .quad_weights()
            .iter()
            .zip(g.measure_weights())
            .filter(|(a, b)| a != b)
            .count();
        assert!(changed <= 16, "{changed} weights corrected");
    }
}
