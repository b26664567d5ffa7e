//! Numeric (binary64) counterpart of the exact solver: operator-space norms,
//! sampled completely bounded norms, contraction radii, and the chord
//! iteration for implicit and inverse problems.
//!
//! Matrix tuples carry the norm `max_i ‖X_i‖` (largest spectral norm), which
//! satisfies `‖X ⊕ Y‖ = max(‖X‖, ‖Y‖)` exactly.

mod contraction;
mod norm;
mod solve;

pub use contraction::{contraction_search, ContractionReport, SearchOptions, CB_SAFETY, DEFAULT_SEED, RADIUS_FLOOR};
pub use norm::{cb_norm_estimate, ns_norm, operator_norm_estimate, spectral_norm, CbEstimate, CbWitness};
pub use solve::{
    implicit_derivative_num, implicit_solve_num, inverse_solve_num, SolveOptions, SolveReport, Termination,
};
