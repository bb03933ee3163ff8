use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use super::spacetime::{mixed_norm, Derivative, SpaceTimeSample};
use crate::error::{invalid, Error, Result};
use crate::radial::{lp_norm, RadialField};
use crate::solver::linear_duhamel;
use crate::spectral::{free_fractional_gradient, SpectralOperator};

/// Exponent pair `(q, r)` with `4/q + n/r = n/2` and `r < n/2`, checked in
/// exact rational arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdmissiblePair {
    q: Ratio<i64>,
    r: Ratio<i64>,
    n: i64,
}

fn parse_ratio(name: &'static str, s: &str) -> Result<Ratio<i64>> {
    s.trim().parse::<Ratio<i64>>().map_err(|e| invalid(name, format!("cannot parse `{s}` as a fraction: {e}")))
}

impl AdmissiblePair {
    pub fn new(q: Ratio<i64>, r: Ratio<i64>, n: usize) -> Result<Self> {
        let n = n as i64;
        let zero = Ratio::from_integer(0);
        if q <= zero || r <= zero {
            return Err(Error::NotAdmissible { identity: format!("exponents must be positive, got q = {q}, r = {r}") });
        }
        let lhs = Ratio::from_integer(4) / q + Ratio::from_integer(n) / r;
        let rhs = Ratio::new(n, 2);
        if lhs != rhs {
            return Err(Error::NotAdmissible { identity: format!("4/q + n/r = {lhs} but n/2 = {rhs}") });
        }
        if q < Ratio::from_integer(2) {
            return Err(Error::NotAdmissible { identity: format!("q = {q} < 2") });
        }
        if r >= rhs {
            return Err(Error::NotAdmissible { identity: format!("r = {r} is not below n/2 = {rhs}") });
        }
        Ok(Self { q, r, n })
    }

    /// Parses fractions such as `"90/41"`.
    pub fn parse(q: &str, r: &str, n: usize) -> Result<Self> {
        Self::new(parse_ratio("q", q)?, parse_ratio("r", r)?, n)
    }

    /// The pair `(2(n+4)/(n-4), 2n(n+4)/(n²+16))` behind the M-norm.
    pub fn m_pair(n: usize) -> Result<Self> {
        let m = n as i64;
        Self::new(Ratio::new(2 * (m + 4), m - 4), Ratio::new(2 * m * (m + 4), m * m + 16), n)
    }

    pub fn q(&self) -> f64 {
        *self.q.numer() as f64 / *self.q.denom() as f64
    }

    pub fn r(&self) -> f64 {
        *self.r.numer() as f64 / *self.r.denom() as f64
    }

    pub fn dimension(&self) -> usize {
        self.n as usize
    }
}

impl fmt::Display for AdmissiblePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrichartzQuotient {
    pub quotient: f64,
    /// `‖Δu‖_{L^q(I, L^r)}`
    pub solution_norm: f64,
    /// `‖Δu₀‖_{L²}`
    pub data_norm: f64,
    /// `‖∇h‖_{L²(I, L^{2n/(n+2)})}`
    pub forcing_norm: f64,
}

/// Strichartz quotient for the solution of `u_t = iHu + ih`, `u(t₀) = u₀`,
/// sampled at `times` (the forcing, if any, is sampled at the same times).
pub fn strichartz_quotient(
    op_full: &SpectralOperator,
    op_free: &SpectralOperator,
    u0: &RadialField,
    h: Option<&[RadialField]>,
    times: &[f64],
    pair: &AdmissiblePair,
) -> Result<StrichartzQuotient> {
    let n = op_full.grid().dimension();
    if pair.dimension() != n {
        return Err(Error::NotAdmissible { identity: format!("pair was validated for n = {}, grid has n = {n}", pair.dimension()) });
    }
    let states = linear_duhamel(op_full, u0, times, h)?;
    let sample = SpaceTimeSample::new(times.to_vec(), states)?;
    let solution_norm = mixed_norm(&sample, pair.q(), pair.r(), Derivative::Laplacian, op_free)?;
    let data_norm = lp_norm(&free_fractional_gradient(op_free, 2.0, u0)?, 2.0)?;
    let forcing_norm = match h {
        Some(h) => {
            let fs = SpaceTimeSample::new(times.to_vec(), h.to_vec())?;
            let nn = n as f64;
            mixed_norm(&fs, 2.0, 2.0 * nn / (nn + 2.0), Derivative::Gradient, op_free)?
        }
        None => 0.0,
    };
    let denominator = data_norm + forcing_norm;
    if denominator == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(StrichartzQuotient { quotient: solution_norm / denominator, solution_norm, data_norm, forcing_norm })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_pair_is_admissible_for_n5() {
        let pair = AdmissiblePair::m_pair(5).unwrap();
        assert_eq!(pair.to_string(), "(18, 90/41)");
        assert!(AdmissiblePair::parse("168/5", "21/10", 5).is_ok());
        assert!(AdmissiblePair::parse("184/15", "23/10", 5).is_ok());
    }

    #[test]
    fn violations_name_the_identity() {
        match AdmissiblePair::parse("18", "2", 5) {
            Err(Error::NotAdmissible { identity }) => assert!(identity.contains("4/q + n/r")),
            other => panic!("{other:?}"),
        }
        // (∞-like) r = n/2 endpoint is excluded
        assert!(AdmissiblePair::parse("2", "10/3", 5).is_err());
        assert!(AdmissiblePair::parse("x", "2", 5).is_err());
    }
}
