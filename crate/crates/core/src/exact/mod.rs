//! Exact arithmetic over Gaussian rationals: polynomials, polynomial
//! matrices, fraction-free elimination and the certificates built on them.

pub mod certify;
pub mod gaussian;
pub mod poly;
pub mod polymatrix;

pub use certify::{certify_for_state, certify_full_space, sweep_states, Certifier};
pub use gaussian::GaussianRational;
pub use poly::Polynomial;
pub use polymatrix::{build_bp, jacobian_rank_at, ExactMatrix, PolyMatrix};
