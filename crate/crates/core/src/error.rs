use thiserror::Error;

/// Errors raised by the tomography library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("point outside domain: {0}")]
    OutsideDomain(String),
    #[error("normalization correction {factor} outside budget (under-resolved grid?)")]
    Normalization { factor: f64 },
    #[error("reconstruction fidelity {fidelity} below {threshold} (insufficient parameter coverage)")]
    LowFidelity { fidelity: f64, threshold: f64 },
    #[error("memory budget exceeded: {required} entries required, budget is {budget}")]
    MemoryBudget { required: usize, budget: usize },
    #[error("boundary leakage: edge probability {edge_probability:e} at t = {time}")]
    BoundaryLeakage { edge_probability: f64, time: f64 },
    #[error("unsupported field class: {0}")]
    UnsupportedField(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
