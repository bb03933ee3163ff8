//! Measurements on computed solutions: space-time norms, Sobolev
//! equivalence, dispersive decay, Strichartz quotients, localized mass and
//! the Morawetz functional.

mod fit;
mod localized;
mod morawetz;
mod sobolev;
mod spacetime;
mod strichartz;

pub use fit::{
    first_contamination, fit_decay, fit_line, fit_power_law, predicted_decay_exponent, propagate_many, FitResult,
};
pub use localized::{localized_mass_rate_check, localized_mass_sweep, LocalizedMassReport, LocalizedMassSweep, ZERO_FLOOR};
pub use morawetz::{morawetz_check, MorawetzReport};
pub use sobolev::sobolev_equiv_ratio;
pub use spacetime::{
    mixed_norm, resolution_change, spacetime_norm, time_lq, Derivative, NormKind, SpaceTimeSample,
};
pub use strichartz::{strichartz_quotient, AdmissiblePair, StrichartzQuotient};
