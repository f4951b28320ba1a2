//! Modular families of fake elliptic curves.
//!
//! An indefinite quaternion algebra `B = (a, b / Q)` is embedded in
//! `M_2(R)`; a maximal order `O ⊂ B` gives for every `τ` in the upper half
//! plane the abelian surface `A_τ = C² / O·(τ, 1)ᵗ`. Over the Shimura curve
//! these surfaces form a family `M → C`. This crate builds every piece of
//! that construction with exact arithmetic where the data is algebraic and
//! arbitrary-precision floats elsewhere, and decides which compact
//! submanifolds of `M` split: fibers never do, elliptic curves inside
//! fibers and étale multisections always do.

pub mod cli;
pub mod cm_points;
pub mod error;
pub mod family;
pub mod linalg;
pub mod orders;
pub mod quaternion;
pub mod splitting;

pub use error::{Error, ParseError, Result};
