use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::radial::RadialField;
use crate::spectral::SpectralOperator;

/// `(e^z - 1)/z` and `(e^z - 1 - z)/z²`, with series near the origin.
fn phi12(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-3 {
        let phi1 = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
        let phi2 = 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
        (phi1, phi2)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e - 1.0 - z) / (z * z))
    }
}

/// States of `u_t = iHu + ih(t)` at `times`, starting from `u(times[0]) = u0`,
/// with `h` linear in time between consecutive samples; the integral over
/// each interval is exact for that interpolant.
pub fn linear_duhamel(
    op: &SpectralOperator,
    u0: &RadialField,
    times: &[f64],
    forcing: Option<&[RadialField]>,
) -> Result<Vec<RadialField>> {
    op.check_grid(u0)?;
    if times.is_empty() {
        return Err(invalid("times", "need at least one time"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("times", "must be strictly increasing"));
    }
    let hc: Option<Vec<Vec<Complex64>>> = match forcing {
        Some(h) => {
            if h.len() != times.len() {
                return Err(invalid("h", format!("{} forcing samples for {} times", h.len(), times.len())));
            }
            for f in h {
                op.check_grid(f)?;
            }
            let refs: Vec<&[Complex64]> = h.iter().map(|f| f.values()).collect();
            Some(op.analyze_batch(&refs))
        }
        None => None,
    };
    let mu = op.eigenvalues();
    let mut c = op.analyze(u0)?;
    let mut coeffs = vec![c.clone()];
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        for i in 0..c.len() {
            let z = Complex64::new(0.0, mu[i] * dt);
            let mut next = c[i] * z.exp();
            if let Some(h) = &hc {
                let (p1, p2) = phi12(z);
                next += Complex64::new(0.0, dt) * ((p1 - p2) * h[k - 1][i] + p2 * h[k][i]);
            }
            c[i] = next;
        }
        coeffs.push(c.clone());
    }
    let refs: Vec<&[Complex64]> = coeffs.iter().map(Vec::as_slice).collect();
    op.synthesize_batch(&refs)
        .into_iter()
        .map(|v| RadialField::new(op.grid().clone(), v).map_err(|_| Error::BlowUp { time: times[0] }))
        .collect()
}
