//! Direct finite-difference application of the radial Laplacian through the
//! Liouville substitution `w = r^{(n-1)/2} u`.

use num_complex::Complex64;

use crate::error::Result;
use crate::radial::{lp_norm, RadialField, RadialGrid};

/// `r_j^{(n-1)/2}` at every node.
pub fn liouville_factors(grid: &RadialGrid) -> Vec<f64> {
    let e = (grid.dimension() as f64 - 1.0) / 2.0;
    grid.nodes().iter().map(|&r| r.powf(e)).collect()
}

/// Inverse-square coefficient `(n-1)(n-3)/4` of the transformed operator.
pub fn inverse_square_coefficient(n: usize) -> f64 {
    let n = n as f64;
    (n - 1.0) * (n - 3.0) / 4.0
}

/// Diagonal and off-diagonal of the symmetric tridiagonal matrix `L`
/// representing `∂_rr - c/r²` with Dirichlet ends.
pub(crate) fn tridiagonal(grid: &RadialGrid) -> (Vec<f64>, f64) {
    let h = grid.spacing();
    let c = inverse_square_coefficient(grid.dimension());
    let diag = grid.nodes().iter().map(|&r| -2.0 / (h * h) - c / (r * r)).collect();
    (diag, 1.0 / (h * h))
}

fn apply_tridiagonal(diag: &[f64], off: f64, w: &[Complex64]) -> Vec<Complex64> {
    let n = w.len();
    (0..n)
        .map(|j| {
            let mut acc = w[j] * diag[j];
            if j > 0 {
                acc += w[j - 1] * off;
            }
            if j + 1 < n {
                acc += w[j + 1] * off;
            }
            acc
        })
        .collect()
}

/// `Δu` on the grid.
pub fn apply_laplacian(u: &RadialField) -> RadialField {
    let grid = u.grid();
    let s = liouville_factors(grid);
    let (diag, off) = tridiagonal(grid);
    let w: Vec<Complex64> = u.values().iter().zip(&s).map(|(z, f)| z * f).collect();
    let lw = apply_tridiagonal(&diag, off, &w);
    RadialField::from_parts(grid.clone(), lw.iter().zip(&s).map(|(z, f)| z / f).collect())
}

/// `Δ²u` as the square of the discrete Laplacian.
pub fn apply_bilaplacian(u: &RadialField) -> RadialField {
    apply_laplacian(&apply_laplacian(u))
}

/// `‖Δu‖_{L²}`.
pub fn h2dot_norm(u: &RadialField) -> Result<f64> {
    lp_norm(&apply_laplacian(u), 2.0)
}

/// Inhomogeneous norm `‖(1 - Δ)u‖_{L²}`.
pub fn h2_norm(u: &RadialField) -> Result<f64> {
    let lap = apply_laplacian(u);
    let v = u.zip_with(&lap, |a, b| a - b)?;
    lp_norm(&v, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::make_grid;

    #[test]
    fn laplacian_of_gaussian_matches_closed_form() {
        let g = make_grid(5, 12.0, 1200).unwrap();
        let u = RadialField::from_real_fn(g.clone(), |r| (-r * r).exp()).unwrap();
        let lap = apply_laplacian(&u);
        let exact = RadialField::from_real_fn(g.clone(), |r| (4.0 * r * r - 10.0) * (-r * r).exp()).unwrap();
        let err = lp_norm(&lap.zip_with(&exact, |a, b| a - b).unwrap(), 2.0).unwrap();
        assert!(err / lp_norm(&exact, 2.0).unwrap() < 1e-4, "{err}");
        let h = g.spacing();
        for (j, &r) in g.nodes().iter().enumerate().take(400) {
            if r < 0.5 {
                continue;
            }
            let exact = (4.0 * r * r - 10.0) * (-r * r).exp();
            assert!((lap.values()[j].re - exact).abs() < 40.0 * h * h, "r={r}");
        }
    }

    #[test]
    fn energy_oracle_for_gaussian() {
        // ∫ (4r² - 10)² e^{-2r²} r⁴ dr = 105 √(2π) / 64
        let g = make_grid(5, 8.0, 8000).unwrap();
        let u = RadialField::from_real_fn(g.clone(), |r| (-r * r).exp()).unwrap();
        let half = 0.5 * h2dot_norm(&u).unwrap().powi(2);
        let exact = 0.5 * g.surface_constant() * 105.0 * (2.0 * std::f64::consts::PI).sqrt() / 64.0;
        assert!((half - exact).abs() / exact < 1e-6, "{half} vs {exact}");
    }
}
