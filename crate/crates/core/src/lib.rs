//! Ground state of a neutral two-body system moving across a uniform
//! magnetic field in the plane.
//!
//! The crate provides a double perturbation series in the field and the
//! center-of-mass momentum, an analysis of the effective potential, a
//! variational solver with two-well trial functions and a finite-difference
//! eigensolver used as an independent check.

// `!(x > 0.0)` is used on purpose so NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod oracle;
pub mod perturbation;
pub mod potential;
pub mod units;
pub mod variational;

pub use error::{Error, Result};
pub use units::{FieldConfig, Mass, SystemSpec};
