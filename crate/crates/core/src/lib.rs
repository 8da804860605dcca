//! Thresholded Galerkin least-squares estimation of a structural function in
//! nonparametric instrumental regression, with a fully data-driven choice of
//! the projection dimension.
//!
//! The crate also ships analytic simulation designs, the population
//! quantities that the estimator is benchmarked against, and a seeded Monte
//! Carlo harness.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod dgp;
pub mod error;
mod exact;
pub mod galerkin;
pub mod harness;
pub mod selection;
pub mod theory;

pub use error::{Error, Result};
