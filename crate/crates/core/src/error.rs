use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension n = {n} is below 5; the low-dimension override is required")]
    DimensionBelowFive { n: usize },

    #[error("too few grid points: {got} (minimum {min})")]
    TooFewPoints { got: usize, min: usize },

    #[error("cannot build positive quadrature weights for n = {n} with {points} points")]
    Quadrature { n: usize, points: usize },

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("operator with {points} points exceeds the dense eigendecomposition budget of {budget}")]
    OperatorBudget { points: usize, budget: usize },

    #[error("resolvent point {re}+{im}i lies on the discrete spectrum (distance {distance:e})")]
    OnSpectrum { re: f64, im: f64, distance: f64 },

    #[error("non-finite nonlinearity at t = {time}: blow-up suspected")]
    BlowUp { time: f64 },

    #[error("fixed-point iteration is not contracting (measured factor {factor:.4} after {iterations} sweeps)")]
    NonContraction { factor: f64, iterations: usize },

    #[error("fixed-point iteration did not reach tolerance: distance {distance:e} after {iterations} sweeps (factor {factor:.4})")]
    NotConverged { distance: f64, iterations: usize, factor: f64 },

    #[error("boundary contamination at t = {time} (boundary mass fraction {fraction:e})")]
    WindowContaminated { time: f64, fraction: f64 },

    #[error("pair is not B-admissible: {identity}")]
    NotAdmissible { identity: String },

    #[error("time sampling under-resolved: rate estimate changed by {change:.1}% on stride halving")]
    UnderResolved { change: f64 },

    #[error("nonlinearity p = {p} is not energy-critical (expected {critical})")]
    NotCritical { p: f64, critical: f64 },

    #[error("too few time samples: {got} (need at least {need})")]
    TooFewSamples { got: usize, need: usize },

    #[error("division by a vanishing norm")]
    ZeroDenominator,

    #[error("unknown series `{name}`; available: {available}")]
    UnknownSeries { name: String, available: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed binary data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
