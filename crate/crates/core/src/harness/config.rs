use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::AdmissiblePair;
use crate::error::{invalid, Error, Result};
use crate::potentials::{PotentialSpec, DEFAULT_DELTA_N};
use crate::radial::{GridOptions, RadialGrid};
use crate::solver::{critical_exponent, SimulationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Conservation,
    Decay,
    SobolevEquiv,
    Strichartz,
    LocalizedMass,
    Morawetz,
    SmallDataGlobal,
    SubcriticalGlobalCases,
    Perturbation,
    WaveOperator,
    Scattering,
    FinalState,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Conservation => "conservation",
            Self::Decay => "decay",
            Self::SobolevEquiv => "sobolev_equiv",
            Self::Strichartz => "strichartz",
            Self::LocalizedMass => "localized_mass",
            Self::Morawetz => "morawetz",
            Self::SmallDataGlobal => "small_data_global",
            Self::SubcriticalGlobalCases => "subcritical_global_cases",
            Self::Perturbation => "perturbation",
            Self::WaveOperator => "wave_operator",
            Self::Scattering => "scattering",
            Self::FinalState => "final_state",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub allow_low_dimension: bool,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_n() -> usize {
    5
}
fn default_r_max() -> f64 {
    20.0
}
fn default_points() -> usize {
    256
}
fn default_budget() -> usize {
    crate::spectral::DEFAULT_BUDGET
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 5, r_max: 20.0, points: 256, allow_low_dimension: false, budget: default_budget() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    #[serde(default = "default_family")]
    pub family: String,
    #[serde(default)]
    pub coefficients: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta_n: f64,
}

fn default_family() -> String {
    "zero".into()
}
fn default_delta() -> f64 {
    DEFAULT_DELTA_N
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self { family: default_family(), coefficients: Vec::new(), delta_n: DEFAULT_DELTA_N }
    }
}

/// `p` as a number or the word `critical` (`2n/(n-4) - 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Power {
    Value(f64),
    Named(CriticalTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalTag {
    Critical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "critical_power")]
    pub p: Power,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "default_monitor")]
    pub monitor_stride: usize,
    #[serde(default)]
    pub snapshot_stride: usize,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_picard_iter")]
    pub picard_max_iter: usize,
    #[serde(default = "default_window")]
    pub picard_window: f64,
    #[serde(default = "default_blowup")]
    pub blowup_factor: f64,
    #[serde(default = "default_boundary")]
    pub boundary_threshold: f64,
}

fn one() -> f64 {
    1.0
}
fn critical_power() -> Power {
    Power::Named(CriticalTag::Critical)
}
fn default_dt() -> f64 {
    1e-3
}
fn default_monitor() -> usize {
    10
}
fn default_picard_tol() -> f64 {
    1e-10
}
fn default_picard_iter() -> usize {
    50
}
fn default_window() -> f64 {
    0.01
}
fn default_blowup() -> f64 {
    1e6
}
fn default_boundary() -> f64 {
    1e-6
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            p: critical_power(),
            dt: default_dt(),
            t_end: 1.0,
            monitor_stride: default_monitor(),
            snapshot_stride: 0,
            picard_tol: default_picard_tol(),
            picard_max_iter: default_picard_iter(),
            picard_window: default_window(),
            blowup_factor: default_blowup(),
            boundary_threshold: default_boundary(),
        }
    }
}

impl SimulationSection {
    pub fn to_config(&self, n: usize) -> SimulationConfig {
        let (p, critical) = match self.p {
            Power::Value(p) => (p, false),
            Power::Named(CriticalTag::Critical) => (critical_exponent(n), true),
        };
        SimulationConfig {
            lambda: self.lambda,
            p,
            dt: self.dt,
            t_end: self.t_end,
            monitor_stride: self.monitor_stride,
            snapshot_stride: self.snapshot_stride,
            picard_tol: self.picard_tol,
            picard_max_iter: self.picard_max_iter,
            picard_window: self.picard_window,
            critical,
            blowup_factor: self.blowup_factor,
            boundary_threshold: self.boundary_threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// `A e^{-(r-c)²/(2σ²)} e^{ikr}`
    Gaussian,
    /// Seeded superposition of the lowest eigenmodes of `H`.
    RandomModes,
    /// A single eigenmode of `H`.
    Eigenmode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default = "default_kind")]
    pub kind: DataKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub wavenumber: f64,
    /// `τ` of the free smoothing `e^{-τΔ²}` applied last.
    #[serde(default)]
    pub smoothing: f64,
    /// `k` in the prefactor `(-Δ)^k` applied before smoothing.
    #[serde(default)]
    pub laplacian_power: u32,
    #[serde(default)]
    pub mode: usize,
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Rescale so that `‖Δu₀‖² = h2dot_target`.
    #[serde(default)]
    pub h2dot_target: Option<f64>,
}

fn default_kind() -> DataKind {
    DataKind::Gaussian
}
fn default_modes() -> usize {
    10
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            kind: DataKind::Gaussian,
            amplitude: 1.0,
            sigma: 1.0,
            center: 0.0,
            wavenumber: 0.0,
            smoothing: 0.0,
            laplacian_power: 0,
            mode: 0,
            modes: 10,
            h2dot_target: None,
        }
    }
}

/// Experiment-specific parameters; each experiment reads the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Knobs {
    /// Decay: Lebesgue exponent of the main fit and of the control fit.
    pub decay_p: f64,
    pub control_p: f64,
    /// Decay: fitting window `[t0, t1]` and number of log-spaced samples.
    pub window: [f64; 2],
    pub samples: usize,
    /// Sobolev and Strichartz: number of seeded random draws.
    pub draws: usize,
    pub s_list: Vec<f64>,
    pub p_list: Vec<f64>,
    /// Strichartz: exponent pairs as fractions, e.g. `["18", "90/41"]`.
    pub pairs: Vec<[String; 2]>,
    /// Strichartz: interval length, number of time samples, eigenmode of the closed-form case.
    pub interval: f64,
    pub time_samples: usize,
    pub eigenmode: usize,
    /// Localized mass: ball radii.
    pub r_list: Vec<f64>,
    /// Morawetz: `K` values and interval lengths (intervals start at 0).
    pub k_list: Vec<f64>,
    pub interval_list: Vec<f64>,
    /// Morawetz: run the λ = 0 interval-doubling control.
    pub linear_control: bool,
    /// Wave operator and scattering: probe times / Cauchy chain.
    pub times: Vec<f64>,
    /// Scattering: perturbation sizes of the continuity proxy.
    pub continuity_deltas: Vec<f64>,
    /// Scattering: also run the λ = 0 degenerate case.
    pub degenerate_check: bool,
    /// Final state: start of the backward solve and the shrink factor of the smallness sweep.
    pub t_start: f64,
    pub shrink: f64,
    /// Perturbation: data gaps and forcing amplitude.
    pub gaps: Vec<f64>,
    pub forcing_amplitude: f64,
    /// Subcritical cases: amplitudes of the small and large data.
    pub small_amplitude: f64,
    pub large_amplitude: f64,
}

impl Default for Knobs {
    fn default() -> Self {
        Self {
            decay_p: 10.0,
            control_p: 2.0,
            window: [2.0, 20.0],
            samples: 16,
            draws: 50,
            s_list: vec![0.5, 1.0, 1.5, 2.0],
            p_list: vec![1.5, 2.0, 2.2],
            pairs: vec![
                ["18".into(), "90/41".into()],
                ["168/5".into(), "21/10".into()],
                ["184/15".into(), "23/10".into()],
            ],
            interval: 1.0,
            time_samples: 201,
            eigenmode: 0,
            r_list: vec![2.0, 4.0, 8.0],
            k_list: vec![1.0, 2.0, 4.0],
            interval_list: vec![0.5, 1.0, 2.0],
            linear_control: false,
            times: vec![5.0, 10.0, 20.0, 40.0],
            continuity_deltas: Vec::new(),
            degenerate_check: false,
            t_start: 10.0,
            shrink: 10.0,
            gaps: vec![1e-3, 1e-4, 1e-5],
            forcing_amplitude: 0.0,
            small_amplitude: 0.05,
            large_amplitude: 3.0,
        }
    }
}

/// Pass thresholds; any of them can be overridden in `[tolerances]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub mass_drift: f64,
    pub energy_drift: f64,
    /// Allowed relative deviation of the dt-halving drift ratio from 4.
    pub halving_band: f64,
    pub decay_relative: f64,
    pub control_slope: f64,
    pub fit_residual: f64,
    pub sobolev_low: f64,
    pub sobolev_high: f64,
    pub sobolev_identity: f64,
    pub strichartz_spread: f64,
    pub closed_form: f64,
    pub localized_ratio: f64,
    pub zero_rate: f64,
    pub morawetz_spread: f64,
    pub morawetz_cap: f64,
    pub linear_doubling: f64,
    pub small_data_factor: f64,
    pub perturbation_slope: f64,
    pub wave_ratio: f64,
    pub mass_identity: f64,
    pub energy_identity: f64,
    pub degenerate: f64,
    pub continuity_slope: f64,
    /// Round-trip gap in units of `picard_tol`.
    pub round_trip_factor: f64,
    pub resolution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass_drift: 1e-8,
            energy_drift: 1e-6,
            halving_band: 0.3,
            decay_relative: 0.15,
            control_slope: 0.05,
            fit_residual: 0.1,
            sobolev_low: 0.5,
            sobolev_high: 2.0,
            sobolev_identity: 1e-9,
            strichartz_spread: 10.0,
            closed_form: 1e-6,
            localized_ratio: 3.0,
            zero_rate: 1e-8,
            morawetz_spread: 10.0,
            morawetz_cap: 100.0,
            linear_doubling: 2.0,
            small_data_factor: 2.0,
            perturbation_slope: 0.1,
            wave_ratio: 0.1,
            mass_identity: 1e-6,
            energy_identity: 0.05,
            degenerate: 1e-9,
            continuity_slope: 0.3,
            round_trip_factor: 10.0,
            resolution: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub knobs: Knobs,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn minimal(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: 0,
            output_dir: default_output(),
            grid: GridSection::default(),
            potential: PotentialSection::default(),
            simulation: SimulationSection::default(),
            data: DataSection::default(),
            knobs: Knobs::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        PotentialSpec::from_name(&self.potential.family, &self.potential.coefficients, self.grid.n)
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        self.simulation.to_config(self.grid.n)
    }

    pub fn grid_options(&self) -> GridOptions {
        GridOptions { allow_low_dimension: self.grid.allow_low_dimension }
    }

    pub fn admissible_pairs(&self) -> Result<Vec<AdmissiblePair>> {
        self.knobs.pairs.iter().map(|[q, r]| AdmissiblePair::parse(q, r, self.grid.n)).collect()
    }

    /// Checks every referenced parameter before any computation.
    pub fn validate(&self) -> Result<()> {
        RadialGrid::new(self.grid.n, self.grid.r_max, self.grid.points, self.grid_options())?;
        self.potential_spec()?;
        if !(self.potential.delta_n.is_finite() && self.potential.delta_n > 0.0) {
            return Err(invalid("delta_n", "must be positive"));
        }
        if let Power::Value(p) = self.simulation.p {
            if !(p > 1.0) {
                return Err(invalid("p", format!("must exceed 1, got {p}")));
            }
        }
        self.simulation_config().validate(self.grid.n)?;
        let d = &self.data;
        if !(d.sigma.is_finite() && d.sigma > 0.0) {
            return Err(invalid("sigma", "must be positive"));
        }
        if !(d.smoothing.is_finite() && d.smoothing >= 0.0) {
            return Err(invalid("smoothing", "must be nonnegative"));
        }
        if d.modes == 0 || d.modes > self.grid.points || d.mode >= self.grid.points {
            return Err(invalid("modes", "mode indices must lie within the grid"));
        }
        if let Some(t) = d.h2dot_target {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid("h2dot_target", "must be positive"));
            }
        }
        let k = &self.knobs;
        match self.experiment {
            ExperimentKind::Decay => {
                if !(k.window[0] > 0.0 && k.window[1] > k.window[0]) {
                    return Err(invalid("window", "need 0 < t0 < t1"));
                }
                if k.decay_p < 2.0 || k.control_p < 2.0 {
                    return Err(invalid("decay_p", "decay exponents need p >= 2"));
                }
            }
            ExperimentKind::SobolevEquiv => {
                let half = self.grid.n as f64 / 2.0;
                if k.s_list.iter().any(|s| !(0.0..=2.0).contains(s)) {
                    return Err(invalid("s_list", "entries must lie in [0, 2]"));
                }
                if k.p_list.iter().any(|&p| !(p > 1.0 && p < half)) {
                    return Err(invalid("p_list", format!("entries must lie in (1, {half})")));
                }
            }
            ExperimentKind::Strichartz => {
                self.admissible_pairs()?;
                if k.time_samples < 4 || !(k.interval > 0.0) {
                    return Err(invalid("time_samples", "need at least 4 samples on a positive interval"));
                }
            }
            ExperimentKind::Morawetz => {
                if !self.simulation_config().critical {
                    return Err(Error::NotCritical { p: self.simulation_config().p, critical: critical_exponent(self.grid.n) });
                }
                if k.interval_list.iter().any(|&l| !(l > 0.0 && l <= self.simulation.t_end + 1e-12)) {
                    return Err(invalid("interval_list", "intervals must fit inside [0, t_end]"));
                }
            }
            ExperimentKind::LocalizedMass => {
                if k.r_list.iter().any(|&r| !(r > 0.0)) {
                    return Err(invalid("r_list", "radii must be positive"));
                }
                if self.simulation.snapshot_stride == 0 {
                    return Err(invalid("snapshot_stride", "localized mass needs snapshots"));
                }
            }
            ExperimentKind::WaveOperator => {
                if k.times.windows(2).any(|w| !(w[1] > w[0])) || k.times.len() < 2 {
                    return Err(invalid("times", "need at least two increasing times"));
                }
            }
            ExperimentKind::Scattering | ExperimentKind::FinalState => {
                if self.simulation.snapshot_stride == 0 {
                    return Err(invalid("snapshot_stride", "scattering needs snapshots"));
                }
                if self.experiment == ExperimentKind::FinalState
                    && !(k.t_start > 0.0 && k.t_start < self.simulation.t_end)
                {
                    return Err(invalid("t_start", "must lie inside (0, t_end)"));
                }
            }
            ExperimentKind::Perturbation => {
                if k.gaps.len() < 2 || k.gaps.iter().any(|g| !(*g > 0.0)) {
                    return Err(invalid("gaps", "need at least two positive gaps"));
                }
                if self.simulation.snapshot_stride == 0 {
                    return Err(invalid("snapshot_stride", "the perturbation experiment needs snapshots"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Parses and validates a configuration text. Unknown keys are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
