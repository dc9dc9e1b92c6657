use thiserror::Error;

use crate::lattice::LatticeValue;

/// Errors raised by lattice operations, network construction and the solvers.
#[derive(Error, Debug)]
pub enum Error {
    /// A value does not match the carrier its descriptor describes.
    #[error("descriptor mismatch: {0}")]
    DescriptorMismatch(String),

    /// A scalar argument is outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid lattice descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("invalid lattice value: {0}")]
    InvalidValue(String),

    /// The operation is not defined for this carrier or configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Iteration budget exhausted. `last` holds the final iterate.
    #[error("no convergence after {iterations} iterations (max residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<LatticeValue>,
    },

    /// A simulation ran out of rounds before its termination protocol fired.
    #[error("simulation budget of {rounds} rounds exhausted")]
    BudgetExhausted {
        rounds: usize,
        trace: Box<crate::sim::Trace>,
    },

    /// An argument that must be a clearing section is not one.
    #[error("not a clearing section: {0}")]
    NotClearing(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
