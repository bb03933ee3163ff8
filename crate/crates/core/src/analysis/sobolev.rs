use crate::error::{invalid, Error, Result};
use crate::radial::{lp_norm, RadialField};
use crate::spectral::{apply_function, free_fractional_gradient, SpectralFunction, SpectralOperator};

/// `‖H^{s/4}u‖_{L^p} / ‖|∇|^s u‖_{L^p}`.
pub fn sobolev_equiv_ratio(
    op_full: &SpectralOperator,
    op_free: &SpectralOperator,
    u: &RadialField,
    s: f64,
    p: f64,
) -> Result<f64> {
    if !(0.0..=2.0).contains(&s) {
        return Err(invalid("s", format!("must lie in [0, 2], got {s}")));
    }
    let n = op_full.grid().dimension() as f64;
    if !(p > 1.0 && p < n / 2.0) {
        return Err(invalid("p", format!("must lie in (1, {}), got {p}", n / 2.0)));
    }
    let top = lp_norm(&apply_function(op_full, SpectralFunction::Power(s), u)?, p)?;
    let bottom = lp_norm(&free_fractional_gradient(op_free, s, u)?, p)?;
    if bottom == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(top / bottom)
}
