use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::radial::{l2_norm_squared, RadialField};
use crate::spectral::apply_laplacian;

/// Fraction of `r_max` beyond which mass counts as boundary mass.
pub const BOUNDARY_SHELL: f64 = 0.9;

/// `M(u) = ∫|u|²`.
pub fn mass(u: &RadialField) -> f64 {
    l2_norm_squared(u)
}

/// `ℰ(u) = ‖Δu‖²`.
pub fn h2dot(u: &RadialField) -> f64 {
    l2_norm_squared(&apply_laplacian(u))
}

/// `E(u) = ½∫ |Δu|² + V|u|² + (2λ/(p+1))|u|^{p+1}`.
pub fn energy(u: &RadialField, v: &RadialField, lambda: f64, p: f64) -> Result<f64> {
    u.check_same_grid(v)?;
    let lap = apply_laplacian(u);
    let c = 2.0 * lambda / (p + 1.0);
    let grid = u.grid();
    let density = u.values().iter().zip(lap.values()).zip(v.values()).map(|((z, d), pot)| {
        let a = z.norm();
        d.norm_sqr() + pot.re * a * a + c * a.powf(p + 1.0)
    });
    Ok(0.5 * grid.integrate(density))
}

/// Same as [`energy`] with the potential given as node values.
pub fn energy_with(u: &RadialField, potential: &[f64], lambda: f64, p: f64) -> Result<f64> {
    if potential.len() != u.len() {
        return Err(Error::GridMismatch);
    }
    let v = RadialField::new(u.grid().clone(), potential.iter().map(|&x| Complex64::new(x, 0.0)).collect())?;
    energy(u, &v, lambda, p)
}

/// Mass in the operator weights; conserved exactly by the splitting.
pub fn discrete_mass(u: &RadialField) -> f64 {
    u.grid().integrate_measure(u.values().iter().map(|z| z.norm_sqr()))
}

/// Energy in the operator weights: the Hamiltonian of the semi-discrete system.
pub fn discrete_energy(u: &RadialField, potential: &[f64], lambda: f64, p: f64) -> Result<f64> {
    if potential.len() != u.len() {
        return Err(Error::GridMismatch);
    }
    let lap = apply_laplacian(u);
    let c = 2.0 * lambda / (p + 1.0);
    let density = u.values().iter().zip(lap.values()).zip(potential).map(|((z, d), v)| {
        let a = z.norm();
        d.norm_sqr() + v * a * a + c * a.powf(p + 1.0)
    });
    Ok(0.5 * u.grid().integrate_measure(density))
}

/// Mass in the shell `r > 0.9 r_max`.
pub fn boundary_mass(u: &RadialField) -> f64 {
    let grid = u.grid();
    let edge = BOUNDARY_SHELL * grid.r_max();
    grid.integrate(u.values().iter().zip(grid.nodes()).map(|(z, &r)| if r > edge { z.norm_sqr() } else { 0.0 }))
}

/// `λ|u|^{p-1}u`, failing on overflow.
pub fn nonlinearity(u: &[Complex64], lambda: f64, p: f64, time: f64) -> Result<Vec<Complex64>> {
    let out: Vec<Complex64> = u.iter().map(|z| z * (lambda * z.norm().powf(p - 1.0))).collect();
    if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::BlowUp { time });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn mass_examples() {
        let g = make_grid(5, 20.0, 256).unwrap();
        assert_eq!(mass(&RadialField::zeros(g.clone())), 0.0);
        let one = RadialField::from_real_fn(g.clone(), |_| 1.0).unwrap();
        let exact = 8.0 * PI * PI / 3.0 * 20f64.powi(5) / 5.0;
        assert!((mass(&one) - exact).abs() / exact < 1e-10);
        let u = RadialField::from_real_fn(g, |r| (-r * r / 3.0).exp()).unwrap();
        let c = Complex64::new(3.0, 4.0);
        assert!((mass(&u.scale(c)) - 25.0 * mass(&u)).abs() < 1e-12 * mass(&u) * 25.0);
    }

    #[test]
    fn energy_is_nonnegative_for_defocusing_repulsive() {
        let g = make_grid(5, 20.0, 256).unwrap();
        let v = RadialField::from_real_fn(g.clone(), |r| 0.01 * (1.0 + r * r).powi(-5)).unwrap();
        let u = RadialField::from_fn(g.clone(), |r| Complex64::new((-r * r).exp(), r.sin() * (-r).exp())).unwrap();
        assert!(energy(&u, &v, 1.0, 9.0).unwrap() >= 0.0);
        assert_eq!(energy(&RadialField::zeros(g.clone()), &v, 1.0, 9.0).unwrap(), 0.0);
        let free = energy(&u, &RadialField::zeros(g), 0.0, 9.0).unwrap();
        assert!((free - 0.5 * h2dot(&u)).abs() < 1e-12 * free);
    }

    #[test]
    fn overflow_is_blow_up() {
        let u = [Complex64::new(1e300, 0.0)];
        assert!(matches!(nonlinearity(&u, 1.0, 9.0, 0.5), Err(Error::BlowUp { .. })));
    }
}
