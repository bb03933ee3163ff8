//! Radial computational domain: grid, sampled fields, quadrature and norms.

mod field;
mod grid;
mod norms;

pub use field::RadialField;
pub use grid::{make_grid, unit_sphere_area, GridOptions, RadialGrid, MIN_POINTS};
pub use norms::{
    l2_norm_squared, localized_mass, lp_norm, smooth_step_cutoff, weak_lp_norm, Cutoff, WEAK_LEVEL_FLOOR,
};
