//! Exact and arbitrary-precision scalars plus the small linear-algebra
//! kernel the rest of the crate is built on.

// elimination loops touch several rows per column; indices read better
#![allow(clippy::needless_range_loop)]

pub mod exact;
pub mod numeric;
pub mod quad;
pub mod rational;
pub mod real;

pub use exact::{exact_rank, hermite_normal_form, ExactField, MatrixExact, MatrixQ};
pub use numeric::{numeric_nullspace, numeric_rank, solve_quadratic, solve_real, svd, MatrixAP, Svd};
pub use quad::{QuadExt, QuadField};
pub use rational::Rational;
pub use real::{Complex, Real, DEFAULT_PRECISION};
