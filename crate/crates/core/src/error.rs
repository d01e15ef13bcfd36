use thiserror::Error;

use crate::variational::Classification;

/// Errors produced anywhere in the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("systems are not related by scaling: |mu2 - mu1| = {source_mu} vs {target_mu}")]
    ScalingIncompatible { source_mu: f64, target_mu: f64 },

    #[error("effective potential is singular at the origin")]
    Singularity,

    #[error("magnetic field must be strictly positive here")]
    DegenerateField,

    #[error("momentum {p} is not above the saddle threshold {p_saddle}")]
    OutOfRegime { p: f64, p_saddle: f64 },

    #[error("unsupported perturbation order ({0}, {1})")]
    UnsupportedOrder(u32, u32),

    #[error("invalid trial function: {0}")]
    InvalidTrial(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),

    #[error("no centered-to-decentered flip in the momentum grid (first point {first:?}, last point {last:?})")]
    NotBracketed {
        first: Classification,
        last: Classification,
    },

    #[error("grid needs {required_bytes} bytes, budget is {budget_bytes}; try nx <= {suggested_nx}")]
    GridTooLarge {
        required_bytes: usize,
        budget_bytes: usize,
        suggested_nx: usize,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
