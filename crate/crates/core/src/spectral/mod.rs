//! Discrete `Δ²` and `H = Δ² + V`, their eigendecompositions, and the
//! functional calculus built on them.

mod cache;
mod operator;
mod stencil;

pub use cache::{
    cache_path, decode_field, encode_field, load_operator, potential_hash, read_field, save_operator, write_field,
};
pub use cache::write_atomic;
pub use operator::{
    apply_function, build_operator, build_operator_with, free_fractional_gradient, OperatorKind, OperatorOptions,
    SpectralFunction, SpectralOperator, DEFAULT_BUDGET,
};
pub use stencil::{
    apply_bilaplacian, apply_laplacian, h2_norm, h2dot_norm, inverse_square_coefficient, liouville_factors,
};
