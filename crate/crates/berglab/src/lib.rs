//! berglab: a numerical laboratory for weighted Bergman spaces and Toeplitz
//! operators on model domains in one and several complex variables.
//!
//! The crate computes orthonormal bases and reproducing kernels of weighted
//! Bergman spaces A²(Ω, |ρ|^r) on model domains (disc, polydisc, ball,
//! annulus, punctured disc, spherical shell, lens patches), assembles
//! truncated Toeplitz / multiplication / Hankel Gram matrices in those bases,
//! and runs spectral diagnostics: singular-value tails as compactness
//! indicators, Berezin-transform boundary profiles, weak-convergence probes,
//! kernel localization constants, and Forelli–Rudin inflation identities.

pub mod cli;
pub mod diagnostics;
pub mod domain;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod operator;
pub mod special;
pub mod symbol;

pub use error::{Error, Result};
