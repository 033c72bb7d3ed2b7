use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("particle number must be at least 1")]
    EmptySystem,
    #[error("magnetic quantum number {m} outside [-{j}, {j}] or not on the lattice")]
    MagneticNumberOutOfRange { m: f64, j: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("measurement resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("measurement outcome {0} is invalid for this state")]
    InvalidOutcome(f64),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("fit rejected: {0}")]
    InvalidFit(String),
    #[error("quadrature did not converge: relative change {relative_change:e} at sigma = {sigma}")]
    QuadratureNotConverged { sigma: f64, relative_change: f64 },
    #[error("eigensolver failed to converge")]
    EigenNoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
