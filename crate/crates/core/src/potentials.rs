//! Parametric radial potentials and grid-wise checks of the standing
//! hypotheses on `V` (decay, repulsivity, derivative bounds, sign, and
//! weak-`L^{n/4}` smallness).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::radial::{weak_lp_norm, RadialField, RadialGrid};

/// Default smallness threshold for `‖V‖_{L^{n/4,∞}}`.
pub const DEFAULT_DELTA_N: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialFamily {
    /// `V = 0`.
    Zero,
    /// `V = c ⟨x⟩^{-β}`.
    InverseBracket { c: f64, beta: f64 },
    /// `V = c e^{-a r²}`.
    GaussianBump { c: f64, a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub family: PotentialFamily,
    pub dimension: usize,
}

impl PotentialSpec {
    pub fn zero(dimension: usize) -> Self {
        Self { family: PotentialFamily::Zero, dimension }
    }

    pub fn inverse_bracket(dimension: usize, c: f64, beta: f64) -> Result<Self> {
        let spec = Self { family: PotentialFamily::InverseBracket { c, beta }, dimension };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian_bump(dimension: usize, c: f64, a: f64) -> Result<Self> {
        let spec = Self { family: PotentialFamily::GaussianBump { c, a }, dimension };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from a family name and coefficient list, as written in
    /// experiment configuration files.
    pub fn from_name(name: &str, coefficients: &[f64], dimension: usize) -> Result<Self> {
        let spec = match (name, coefficients) {
            ("zero", []) => Self::zero(dimension),
            ("inverse_bracket", [c, beta]) => {
                Self { family: PotentialFamily::InverseBracket { c: *c, beta: *beta }, dimension }
            }
            ("gaussian_bump", [c, a]) => Self { family: PotentialFamily::GaussianBump { c: *c, a: *a }, dimension },
            ("zero" | "inverse_bracket" | "gaussian_bump", _) => {
                return Err(invalid(
                    "coefficients",
                    format!("wrong coefficient count {} for family `{name}`", coefficients.len()),
                ))
            }
            _ => {
                return Err(invalid(
                    "family",
                    format!("unknown potential family `{name}` (expected zero, inverse_bracket, gaussian_bump)"),
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            PotentialFamily::Zero => Ok(()),
            PotentialFamily::InverseBracket { c, beta } => {
                if !c.is_finite() || !(beta.is_finite() && beta > 0.0) {
                    return Err(invalid("beta", format!("need finite c and beta > 0, got c={c}, beta={beta}")));
                }
                Ok(())
            }
            PotentialFamily::GaussianBump { c, a } => {
                if !c.is_finite() || !(a.is_finite() && a > 0.0) {
                    return Err(invalid("a", format!("need finite c and a > 0, got c={c}, a={a}")));
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self.family {
            PotentialFamily::Zero => true,
            PotentialFamily::InverseBracket { c, .. } | PotentialFamily::GaussianBump { c, .. } => c == 0.0,
        }
    }

    /// `V(r)`.
    pub fn value(&self, r: f64) -> f64 {
        match self.family {
            PotentialFamily::Zero => 0.0,
            PotentialFamily::InverseBracket { c, beta } => c * (1.0 + r * r).powf(-beta / 2.0),
            PotentialFamily::GaussianBump { c, a } => c * (-a * r * r).exp(),
        }
    }

    /// `V'(r)`, analytic for each family.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        match self.family {
            PotentialFamily::Zero => 0.0,
            PotentialFamily::InverseBracket { c, beta } => -c * beta * r * (1.0 + r * r).powf(-beta / 2.0 - 1.0),
            PotentialFamily::GaussianBump { c, a } => -2.0 * a * c * r * (-a * r * r).exp(),
        }
    }

    /// Polynomial decay order of `V` at infinity (`∞` for super-polynomial decay).
    pub fn decay_order(&self) -> f64 {
        match self.family {
            PotentialFamily::InverseBracket { c, beta } if c != 0.0 => beta,
            _ => f64::INFINITY,
        }
    }

    /// Stable textual key, used for cache keys and report echoes.
    pub fn canonical(&self) -> String {
        match self.family {
            PotentialFamily::Zero => format!("zero;n={}", self.dimension),
            PotentialFamily::InverseBracket { c, beta } => {
                format!("inverse_bracket;n={};c={:e};beta={:e}", self.dimension, c, beta)
            }
            PotentialFamily::GaussianBump { c, a } => {
                format!("gaussian_bump;n={};c={:e};a={:e}", self.dimension, c, a)
            }
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

/// `V(r_j)` at every node.
pub fn evaluate_potential(spec: &PotentialSpec, grid: &Arc<RadialGrid>) -> Result<RadialField> {
    if spec.dimension != grid.dimension() {
        return Err(Error::GridMismatch);
    }
    spec.validate()?;
    RadialField::from_real_fn(grid.clone(), |r| spec.value(r))
}

/// A boolean verdict and the measured number that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasuredVerdict {
    pub ok: bool,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeBound {
    pub ok: bool,
    /// `sup ⟨r⟩^{β}|V|`
    pub c0: f64,
    /// `sup ⟨r⟩^{β+1}|V'|`
    pub c1: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `|V| ≲ ⟨x⟩^{-β}` with β above the dimension-dependent threshold;
    /// `measured` is `sup ⟨r⟩^{β_req}|V|`, `threshold` is `β_req`.
    pub decay: MeasuredVerdict,
    pub decay_order: f64,
    /// `x·∇V <= 0`; `measured` is `max r V'(r)`.
    pub repulsive: MeasuredVerdict,
    pub derivative_bound: DerivativeBound,
    /// `V >= 0`; `measured` is `min V`.
    pub nonnegative: MeasuredVerdict,
    /// `‖V‖_{L^{n/4,∞}} <= δ_n`.
    pub weak_norm: MeasuredVerdict,
    /// Fourier-weighted integrability and spectral conditions are not checked.
    pub fourier_condition: &'static str,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.decay.ok && self.repulsive.ok && self.derivative_bound.ok && self.nonnegative.ok && self.weak_norm.ok
    }
}

/// Decay order required of `V`: `n + 3` for odd n, `n + 4` for even n (strict).
pub fn required_decay_order(n: usize) -> f64 {
    if n % 2 == 1 {
        n as f64 + 3.0
    } else {
        n as f64 + 4.0
    }
}

const DERIVATIVE_BETA: f64 = 4.0;

pub fn check_assumptions(spec: &PotentialSpec, grid: &Arc<RadialGrid>, delta_n: f64) -> Result<AssumptionReport> {
    let v = evaluate_potential(spec, grid)?;
    let nodes = grid.nodes();
    let bracket = |r: f64| (1.0 + r * r).sqrt();

    let beta_req = required_decay_order(grid.dimension());
    let decay_constant = nodes.iter().map(|&r| bracket(r).powf(beta_req) * spec.value(r).abs()).fold(0.0, f64::max);
    let order = spec.decay_order();

    let max_radial = nodes.iter().map(|&r| r * spec.radial_derivative(r)).fold(f64::NEG_INFINITY, f64::max);

    let c0 = nodes
        .iter()
        .map(|&r| bracket(r).powf(DERIVATIVE_BETA) * spec.value(r).abs())
        .fold(0.0, f64::max);
    let c1 = nodes
        .iter()
        .map(|&r| bracket(r).powf(DERIVATIVE_BETA + 1.0) * spec.radial_derivative(r).abs())
        .fold(0.0, f64::max);

    let min_v = nodes.iter().map(|&r| spec.value(r)).fold(f64::INFINITY, f64::min);
    let weak = weak_lp_norm(&v, grid.dimension() as f64 / 4.0)?;

    Ok(AssumptionReport {
        decay: MeasuredVerdict {
            ok: order > beta_req && decay_constant.is_finite(),
            measured: decay_constant,
            threshold: beta_req,
        },
        decay_order: order,
        repulsive: MeasuredVerdict { ok: max_radial <= 0.0, measured: max_radial, threshold: 0.0 },
        derivative_bound: DerivativeBound {
            ok: order >= DERIVATIVE_BETA && c0.is_finite() && c1.is_finite(),
            c0,
            c1,
            beta: DERIVATIVE_BETA,
        },
        nonnegative: MeasuredVerdict { ok: min_v >= 0.0, measured: min_v, threshold: 0.0 },
        weak_norm: MeasuredVerdict { ok: weak <= delta_n, measured: weak, threshold: delta_n },
        fourier_condition: "unchecked",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::make_grid;

    #[test]
    fn evaluation_examples() {
        let g = make_grid(5, 20.0, 256).unwrap();
        let zero = evaluate_potential(&PotentialSpec::zero(5), &g).unwrap();
        assert!(zero.is_zero());
        let spec = PotentialSpec::inverse_bracket(5, 0.01, 10.0).unwrap();
        assert_eq!(spec.value(0.0), 0.01);
        assert!((spec.value(3.0) - 0.01 * 1e-5).abs() < 1e-20);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = make_grid(6, 20.0, 64).unwrap();
        assert!(matches!(evaluate_potential(&PotentialSpec::zero(5), &g), Err(Error::GridMismatch)));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for spec in [
            PotentialSpec::inverse_bracket(5, 0.3, 9.5).unwrap(),
            PotentialSpec::gaussian_bump(5, 0.2, 0.7).unwrap(),
        ] {
            for &r in &[0.1, 0.8, 2.5] {
                let h = 1e-6;
                let fd = (spec.value(r + h) - spec.value(r - h)) / (2.0 * h);
                assert!((fd - spec.radial_derivative(r)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn zero_potential_passes_everything() {
        let g = make_grid(5, 20.0, 128).unwrap();
        let rep = check_assumptions(&PotentialSpec::zero(5), &g, DEFAULT_DELTA_N).unwrap();
        assert!(rep.all_ok());
        assert_eq!(rep.weak_norm.measured, 0.0);
        assert_eq!(rep.decay.measured, 0.0);
        assert_eq!(rep.derivative_bound.c0, 0.0);
        assert_eq!(rep.derivative_bound.c1, 0.0);
        assert_eq!(rep.fourier_condition, "unchecked");
    }

    #[test]
    fn repulsive_for_every_nonnegative_bracket() {
        let g = make_grid(5, 20.0, 128).unwrap();
        for &c in &[0.0, 0.01, 0.1, 1.0, 5.0] {
            for &beta in &[0.5, 2.0, 6.0, 10.0, 14.0] {
                let spec = PotentialSpec::inverse_bracket(5, c, beta).unwrap();
                let rep = check_assumptions(&spec, &g, DEFAULT_DELTA_N).unwrap();
                assert!(rep.repulsive.ok, "c={c} beta={beta} max rV'={}", rep.repulsive.measured);
            }
        }
    }

    #[test]
    fn weak_norm_is_linear_in_amplitude() {
        let g = make_grid(5, 20.0, 256).unwrap();
        let a = check_assumptions(&PotentialSpec::inverse_bracket(5, 0.01, 10.0).unwrap(), &g, 0.1).unwrap();
        let b = check_assumptions(&PotentialSpec::inverse_bracket(5, 0.02, 10.0).unwrap(), &g, 0.1).unwrap();
        assert_eq!(b.weak_norm.measured, 2.0 * a.weak_norm.measured);
    }

    #[test]
    fn slow_decay_fails_decay_check() {
        let g = make_grid(5, 20.0, 128).unwrap();
        let rep = check_assumptions(&PotentialSpec::inverse_bracket(5, 0.01, 6.0).unwrap(), &g, 0.1).unwrap();
        assert!(!rep.decay.ok);
        let neg = check_assumptions(&PotentialSpec::gaussian_bump(5, -0.01, 1.0).unwrap(), &g, 0.1).unwrap();
        assert!(!neg.nonnegative.ok);
        assert!(!neg.repulsive.ok);
    }

    #[test]
    fn parse_by_name() {
        assert!(PotentialSpec::from_name("inverse_bracket", &[0.01, 10.0], 5).is_ok());
        assert!(PotentialSpec::from_name("inverse_bracket", &[0.01], 5).is_err());
        assert!(PotentialSpec::from_name("yukawa", &[], 5).is_err());
    }
}
