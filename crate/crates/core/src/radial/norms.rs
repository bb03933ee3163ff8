use crate::error::{invalid, Result};

use super::field::RadialField;

/// Lebesgue norm `‖u‖_{L^p(R^n)}`; `p = f64::INFINITY` gives the nodal maximum.
pub fn lp_norm(u: &RadialField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid("p", format!("Lebesgue exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(u.max_modulus());
    }
    let grid = u.grid();
    // Rescale by the maximum so large p cannot overflow.
    let max = u.max_modulus();
    if max == 0.0 {
        return Ok(0.0);
    }
    let sum = grid.integrate(u.moduli().map(|a| (a / max).powf(p)));
    Ok(max * sum.powf(1.0 / p))
}

/// `‖u‖_{L^2}^2`.
pub fn l2_norm_squared(u: &RadialField) -> f64 {
    u.grid().integrate(u.values().iter().map(|z| z.norm_sqr()))
}

/// Weak Lebesgue quasi-norm `sup_γ γ |{|u| > γ}|^{1/r}` over levels γ >= [`WEAK_LEVEL_FLOOR`].
///
/// The super-level measure is a step function of γ that only changes at
/// the nodal moduli, so the supremum is attained in the limit γ ↑ |u_j| for
/// some node j; it is evaluated exactly from the sorted moduli.
pub fn weak_lp_norm(u: &RadialField, r: f64) -> Result<f64> {
    if r.is_nan() || r <= 1.0 {
        return Err(invalid("r", format!("weak-Lebesgue exponent must exceed 1, got {r}")));
    }
    let grid = u.grid();
    let omega = grid.surface_constant();
    let mut levels: Vec<(f64, f64)> = u
        .moduli()
        .zip(grid.quad_weights())
        .filter(|(a, _)| *a > WEAK_LEVEL_FLOOR)
        .map(|(a, &w)| (a, w))
        .collect();
    levels.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best = 0.0_f64;
    let mut measure = 0.0;
    let mut i = 0;
    while i < levels.len() {
        let level = levels[i].0;
        // nodes tied at this level all belong to {|u| > γ} for γ just below it
        while i < levels.len() && levels[i].0 == level {
            measure += levels[i].1;
            i += 1;
        }
        best = best.max(level * (omega * measure).powf(1.0 / r));
    }
    Ok(best)
}

/// Lower end of the level range for [`weak_lp_norm`].
pub const WEAK_LEVEL_FLOOR: f64 = 1e-12;

/// Smooth radial cutoff profile: 1 on [0, 1], 0 on [2, ∞), values in [0, 1].
#[derive(Clone, Copy)]
pub struct Cutoff {
    profile: fn(f64) -> f64,
}

impl std::fmt::Debug for Cutoff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Cutoff")
    }
}

impl Default for Cutoff {
    fn default() -> Self {
        Self { profile: smooth_step_cutoff }
    }
}

impl Cutoff {
    /// Accepts a custom profile after sampling its defining properties.
    pub fn custom(profile: fn(f64) -> f64) -> Result<Self> {
        for k in 0..=400 {
            let s = k as f64 * 0.01;
            let v = profile(s);
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid("chi", format!("value {v} at {s} outside [0, 1]")));
            }
            if s <= 1.0 && v != 1.0 {
                return Err(invalid("chi", format!("must equal 1 on [0, 1], got {v} at {s}")));
            }
            if s >= 2.0 && v != 0.0 {
                return Err(invalid("chi", format!("must vanish on [2, ∞), got {v} at {s}")));
            }
        }
        Ok(Self { profile })
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.profile)(s)
    }
}

/// C^∞ transition built from `e^{-1/x}`.
pub fn smooth_step_cutoff(s: f64) -> f64 {
    fn psi(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-1.0 / x).exp()
        }
    }
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let a = psi(2.0 - s);
        a / (a + psi(s - 1.0))
    }
}

/// `∫ |u|^2 χ^4(|x|/R) dx` (ball centred at the origin).
pub fn localized_mass(u: &RadialField, radius: f64, chi: &Cutoff) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("R", format!("radius must be positive, got {radius}")));
    }
    let grid = u.grid();
    Ok(grid.integrate(
        u.values()
            .iter()
            .zip(grid.nodes())
            .map(|(z, &r)| z.norm_sqr() * chi.eval(r / radius).powi(4)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::make_grid;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_has_zero_norms() {
        let g = make_grid(5, 20.0, 64).unwrap();
        let u = RadialField::zeros(g);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&u, p).unwrap(), 0.0);
        }
        assert_eq!(weak_lp_norm(&u, 1.25).unwrap(), 0.0);
        assert_eq!(localized_mass(&u, 1.0, &Cutoff::default()).unwrap(), 0.0);
    }

    #[test]
    fn constant_field_l2_norm_matches_monomial_integral() {
        let g = make_grid(5, 20.0, 256).unwrap();
        let u = RadialField::from_real_fn(g, |_| 1.0).unwrap();
        let expected = (8.0 * PI * PI / 3.0 * 20f64.powi(5) / 5.0).sqrt();
        let got = lp_norm(&u, 2.0).unwrap();
        assert!((got - expected).abs() / expected < 1e-10);
    }

    #[test]
    fn homogeneity() {
        let g = make_grid(5, 10.0, 128).unwrap();
        let u = RadialField::from_fn(g, |r| Complex64::new((-r * r).exp(), r.sin() * 0.1)).unwrap();
        let c = Complex64::new(3.0, 4.0);
        for p in [1.0, 2.0, 10.0, f64::INFINITY] {
            let a = lp_norm(&u.scale(c), p).unwrap();
            let b = 5.0 * lp_norm(&u, p).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn rejects_bad_exponents() {
        let g = make_grid(5, 10.0, 32).unwrap();
        let u = RadialField::zeros(g);
        assert!(lp_norm(&u, 0.5).is_err());
        assert!(lp_norm(&u, f64::NAN).is_err());
        assert!(weak_lp_norm(&u, 1.0).is_err());
        assert!(localized_mass(&u, 0.0, &Cutoff::default()).is_err());
    }

    #[test]
    fn cutoff_properties() {
        let chi = Cutoff::default();
        assert_eq!(chi.eval(0.3), 1.0);
        assert_eq!(chi.eval(2.5), 0.0);
        let mut prev = 1.0;
        for k in 0..=200 {
            let v = chi.eval(1.0 + k as f64 * 0.005);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
        assert!(Cutoff::custom(|s| if s < 1.5 { 1.0 } else { 0.0 }).is_ok());
        assert!(Cutoff::custom(|s| (1.0 - s).max(0.0)).is_err());
    }

    #[test]
    fn saturated_cutoff_gives_total_mass() {
        let g = make_grid(5, 20.0, 256).unwrap();
        let u = RadialField::from_real_fn(g, |r| (-r * r).exp()).unwrap();
        let m = l2_norm_squared(&u);
        let lm = localized_mass(&u, 20.0, &Cutoff::default()).unwrap();
        assert_eq!(lm, m);
    }
}
