use num_complex::Complex64;

use super::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::radial::RadialField;
use crate::spectral::{SpectralFunction, SpectralOperator};

/// `u ← e^{iθ|u|^{p-1}} u`, the exact flow of the nonlinear part over a
/// time `θ/λ`. Moduli are untouched.
pub fn nonlinear_phase(values: &mut [Complex64], theta: f64, p: f64, time: f64) -> Result<()> {
    if theta == 0.0 {
        return Ok(());
    }
    for z in values.iter_mut() {
        let phase = theta * z.norm().powf(p - 1.0);
        if !phase.is_finite() {
            return Err(Error::BlowUp { time });
        }
        *z *= Complex64::from_polar(1.0, phase);
    }
    Ok(())
}

/// Source term sampled at a time, as node values.
pub type Forcing<'a> = dyn Fn(f64) -> Vec<Complex64> + Sync + 'a;

/// Second-order splitting: half nonlinear phase, linear propagator
/// `e^{i dt H}`, half nonlinear phase.
pub struct StrangStepper<'a> {
    op: &'a SpectralOperator,
    full: Vec<Complex64>,
    half: Vec<Complex64>,
    dt: f64,
    lambda: f64,
    p: f64,
}

impl<'a> StrangStepper<'a> {
    pub fn new(op: &'a SpectralOperator, dt: f64, lambda: f64, p: f64) -> Result<Self> {
        Ok(Self {
            op,
            full: op.multipliers(SpectralFunction::ExpIt(dt))?,
            half: op.multipliers(SpectralFunction::ExpIt(dt / 2.0))?,
            dt,
            lambda,
            p,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn propagate(&self, values: &mut Vec<Complex64>, multipliers: &[Complex64]) {
        let mut c = self.op.analyze_batch(&[values.as_slice()]).pop().unwrap_or_default();
        for (ck, m) in c.iter_mut().zip(multipliers) {
            *ck *= m;
        }
        *values = self.op.synthesize_batch(&[c.as_slice()]).pop().unwrap_or_default();
    }

    /// Advances node values from `t` to `t + dt`.
    pub fn step(&self, values: &mut Vec<Complex64>, t: f64) -> Result<()> {
        let theta = self.lambda * self.dt / 2.0;
        nonlinear_phase(values, theta, self.p, t)?;
        self.propagate(values, &self.full);
        nonlinear_phase(values, theta, self.p, t + self.dt)
    }

    /// Step of `u_t = i(Hu + λ|u|^{p-1}u) - i e(t)`; the forcing enters as a
    /// full midpoint kick between two linear half steps.
    pub fn step_forced(&self, values: &mut Vec<Complex64>, t: f64, forcing: &Forcing<'_>) -> Result<()> {
        let theta = self.lambda * self.dt / 2.0;
        nonlinear_phase(values, theta, self.p, t)?;
        self.propagate(values, &self.half);
        let e = forcing(t + self.dt / 2.0);
        if e.len() != values.len() {
            return Err(Error::GridMismatch);
        }
        let kick = Complex64::new(0.0, -self.dt);
        for (z, f) in values.iter_mut().zip(&e) {
            *z += kick * f;
        }
        self.propagate(values, &self.half);
        nonlinear_phase(values, theta, self.p, t + self.dt)
    }
}

/// One splitting step of length `cfg.dt`.
pub fn step_strang(u: &RadialField, op: &SpectralOperator, cfg: &SimulationConfig) -> Result<RadialField> {
    op.check_grid(u)?;
    let stepper = StrangStepper::new(op, cfg.dt, cfg.lambda, cfg.p)?;
    let mut values = u.values().to_vec();
    stepper.step(&mut values, 0.0)?;
    RadialField::new(u.grid().clone(), values)
}
