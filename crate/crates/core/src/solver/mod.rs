//! Time evolution: Strang splitting, the collocation fixed-point oracle,
//! monitored trajectories and the forced-perturbation experiment.

mod config;
mod duhamel;
mod functionals;
mod linear;
mod perturbation;
mod strang;
mod trajectory;

pub use config::{critical_exponent, sharp_exponent, SimulationConfig};
pub use duhamel::{solve_duhamel, DuhamelSettings, FixedPointOutcome, Source};
pub use functionals::{
    boundary_mass, discrete_energy, discrete_mass, energy, energy_with, h2dot, mass, nonlinearity, BOUNDARY_SHELL,
};
pub use linear::linear_duhamel;
pub use perturbation::{perturbation_experiment, separable_forcing, PerturbationReport};
pub use strang::{nonlinear_phase, step_strang, Forcing, StrangStepper};
pub use trajectory::{run_forced_trajectory, run_trajectory, TrajectoryRecord, TrajectoryStatus};

use crate::error::Result;
use crate::radial::RadialField;
use crate::spectral::SpectralOperator;

impl SimulationConfig {
    pub fn duhamel_settings(&self) -> DuhamelSettings {
        DuhamelSettings { window: self.picard_window, tol: self.picard_tol, max_iter: self.picard_max_iter }
    }
}

/// Fixed point of `Φ(u)(t) = e^{itH}u₀ + iλ∫₀ᵗ e^{i(t-s)H}|u|^{p-1}u ds` on
/// `[0, T]`, returned with its convergence record.
pub fn solve_picard_outcome(
    u0: &RadialField,
    op: &SpectralOperator,
    cfg: &SimulationConfig,
    t: f64,
) -> Result<FixedPointOutcome> {
    cfg.validate(op.grid().dimension())?;
    let (lambda, p) = (cfg.lambda, cfg.p);
    let source = move |time: f64, u: &[num_complex::Complex64]| nonlinearity(u, lambda, p, time);
    solve_duhamel(op, u0, 0.0, t, &cfg.duhamel_settings(), &source)
}

/// `u(T)` from [`solve_picard_outcome`].
pub fn solve_picard(u0: &RadialField, op: &SpectralOperator, cfg: &SimulationConfig, t: f64) -> Result<RadialField> {
    solve_picard_outcome(u0, op, cfg, t).map(|o| o.state)
}

/// Nonlinear evolution from `u(t0) = u` to `t1` by the fixed-point solver.
pub fn solve_picard_between(
    u: &RadialField,
    op: &SpectralOperator,
    cfg: &SimulationConfig,
    t0: f64,
    t1: f64,
) -> Result<FixedPointOutcome> {
    let (lambda, p) = (cfg.lambda, cfg.p);
    let source = move |time: f64, v: &[num_complex::Complex64]| nonlinearity(v, lambda, p, time);
    solve_duhamel(op, u, t0, t1, &cfg.duhamel_settings(), &source)
}
