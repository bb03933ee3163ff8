use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{DataKind, DataSection};
use crate::error::{invalid, Error, Result};
use crate::radial::{l2_norm_squared, RadialField, RadialGrid};
use crate::solver::h2dot;
use crate::spectral::{apply_function, SpectralFunction, SpectralOperator};

/// Number of eigenmodes in a random field.
pub const RANDOM_MODES: usize = 10;

pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian(grid: &Arc<RadialGrid>, amplitude: f64, sigma: f64, center: f64, wavenumber: f64) -> Result<RadialField> {
    RadialField::from_fn(grid.clone(), |r| {
        let g = amplitude * (-(r - center).powi(2) / (2.0 * sigma * sigma)).exp();
        Complex64::from_polar(g, wavenumber * r)
    })
}

/// Unit-`L²` superposition of the `modes` lowest eigenmodes of `op` with
/// coefficients uniform in the unit square.
pub fn random_modes(op: &SpectralOperator, modes: usize, rng: &mut ChaCha8Rng) -> Result<RadialField> {
    let modes = modes.min(op.len());
    if modes == 0 {
        return Err(invalid("modes", "need at least one mode"));
    }
    let mut c = vec![Complex64::new(0.0, 0.0); op.len()];
    for z in c.iter_mut().take(modes) {
        *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    normalized(op.synthesize(&c)?)
}

pub fn normalized(u: RadialField) -> Result<RadialField> {
    let m = l2_norm_squared(&u);
    if m == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(u.scale_real(1.0 / m.sqrt()))
}

/// Rescales `u` so that `‖Δu‖² = target`.
pub fn with_h2dot(u: &RadialField, target: f64) -> Result<RadialField> {
    let e = h2dot(u);
    if e == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(u.scale_real((target / e).sqrt()))
}

/// Initial datum described by a `[data]` section.
pub fn build_datum(d: &DataSection, op_full: &SpectralOperator, op_free: &SpectralOperator, seed: u64) -> Result<RadialField> {
    let grid = op_full.grid();
    let mut u = match d.kind {
        DataKind::Gaussian => gaussian(grid, d.amplitude, d.sigma, d.center, d.wavenumber)?,
        DataKind::RandomModes => random_modes(op_full, d.modes, &mut seeded_rng(seed, 0))?.scale_real(d.amplitude),
        DataKind::Eigenmode => {
            if d.mode >= op_full.len() {
                return Err(invalid("mode", format!("index {} beyond {} modes", d.mode, op_full.len())));
            }
            normalized(op_full.eigenvector(d.mode))?.scale_real(d.amplitude)
        }
    };
    for _ in 0..d.laplacian_power {
        u = apply_function(op_free, SpectralFunction::Power(2.0), &u)?;
    }
    if d.smoothing > 0.0 {
        u = apply_function(op_free, SpectralFunction::ExpMinusT(d.smoothing), &u)?;
    }
    if let Some(target) = d.h2dot_target {
        u = with_h2dot(&u, target)?;
    }
    Ok(u)
}
