use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Energy-critical power `2n/(n-4) - 1`.
pub fn critical_exponent(n: usize) -> f64 {
    let n = n as f64;
    2.0 * n / (n - 4.0) - 1.0
}

/// `2♯ = 2n/(n-4)`.
pub fn sharp_exponent(n: usize) -> f64 {
    critical_exponent(n) + 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub lambda: f64,
    pub p: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Monitors are recorded every `monitor_stride` steps.
    pub monitor_stride: usize,
    /// Fields are stored every `snapshot_stride` steps; 0 stores none.
    pub snapshot_stride: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Length of one Gauss collocation window of the fixed-point solver.
    pub picard_window: f64,
    /// Marks `p` as the energy-critical power.
    pub critical: bool,
    /// Halt when `‖Δu‖` exceeds this multiple of its initial value.
    pub blowup_factor: f64,
    /// Halt when the mass in `r > 0.9 r_max` exceeds this fraction of the initial mass.
    pub boundary_threshold: f64,
}

impl SimulationConfig {
    pub fn new(lambda: f64, p: f64, dt: f64, t_end: f64) -> Self {
        Self {
            lambda,
            p,
            dt,
            t_end,
            monitor_stride: 1,
            snapshot_stride: 0,
            picard_tol: 1e-10,
            picard_max_iter: 50,
            picard_window: 0.01,
            critical: false,
            blowup_factor: 1e6,
            boundary_threshold: 1e-6,
        }
    }

    /// Critical defocusing/focusing configuration for dimension `n`.
    pub fn critical(n: usize, lambda: f64, dt: f64, t_end: f64) -> Self {
        Self { critical: true, ..Self::new(lambda, critical_exponent(n), dt, t_end) }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let positive = |name: &'static str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive and finite, got {x}")))
            }
        };
        if !self.lambda.is_finite() {
            return Err(invalid("lambda", "must be finite"));
        }
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(invalid("p", format!("nonlinearity power must exceed 1, got {}", self.p)));
        }
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("picard_tol", self.picard_tol)?;
        positive("picard_window", self.picard_window)?;
        positive("blowup_factor", self.blowup_factor)?;
        positive("boundary_threshold", self.boundary_threshold)?;
        if self.dt > self.t_end {
            return Err(invalid("dt", format!("time step {} exceeds t_end {}", self.dt, self.t_end)));
        }
        if self.monitor_stride == 0 {
            return Err(invalid("monitor_stride", "must be at least 1"));
        }
        if self.picard_max_iter == 0 {
            return Err(invalid("picard_max_iter", "must be at least 1"));
        }
        if self.critical {
            let critical = critical_exponent(n);
            if (self.p - critical).abs() >= 1e-12 {
                return Err(Error::NotCritical { p: self.p, critical });
            }
        }
        Ok(())
    }

    /// Number of steps and the step actually used so that they tile `[0, t_end]`.
    pub fn steps(&self) -> (usize, f64) {
        let steps = ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (steps, self.t_end / steps as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_power_for_n5() {
        assert_eq!(critical_exponent(5), 9.0);
        assert_eq!(sharp_exponent(5), 10.0);
        assert!(SimulationConfig::critical(5, 1.0, 1e-3, 1.0).validate(5).is_ok());
        let mut cfg = SimulationConfig::new(1.0, 8.5, 1e-3, 1.0);
        cfg.critical = true;
        assert!(matches!(cfg.validate(5), Err(Error::NotCritical { .. })));
    }

    #[test]
    fn step_count_tiles_interval() {
        let cfg = SimulationConfig::new(0.0, 3.0, 1e-3, 1.0);
        assert_eq!(cfg.steps(), (1000, 1e-3));
        let cfg = SimulationConfig::new(0.0, 3.0, 0.3, 1.0);
        let (n, dt) = cfg.steps();
        assert_eq!(n, 4);
        assert!((dt - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SimulationConfig::new(1.0, 1.0, 1e-3, 1.0).validate(5).is_err());
        assert!(SimulationConfig::new(1.0, 3.0, 2.0, 1.0).validate(5).is_err());
        assert!(SimulationConfig::new(f64::NAN, 3.0, 1e-3, 1.0).validate(5).is_err());
    }
}
