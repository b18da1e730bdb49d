//! Minimal root perturbations of parameterized polynomial systems.
//!
//! Given `F(y, x) = 0` with a known root `(y₀, x₀)`, this crate computes how
//! far the root must move when the parameter changes to `x`, together with
//! three least-norm estimates of that distance and their dual certificates.
//! See [`problems::AnchoredProblem`] for the entry point and [`harness`] for
//! sweeps toward `x₀`.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod nonlinear;
pub mod problems;
pub mod system;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/minimal-perturbation.md")]
    mod minimal_perturbation {}
    #[doc = include_str!("../../../book/src/linearizations.md")]
    mod linearizations {}
    #[doc = include_str!("../../../book/src/duality.md")]
    mod duality {}
    #[doc = include_str!("../../../book/src/lower-bound.md")]
    mod lower_bound {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
