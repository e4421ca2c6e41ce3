//! Bi-fidelity stochastic collocation for linear transport in the diffusive
//! regime.

// NaN must fail positivity checks, so `!(x > 0.0)` is intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifidelity;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod linalg;
pub mod quadrature;
pub mod report;
pub mod selftest;
pub mod solvers;

pub use error::{Error, Phase, Result};
