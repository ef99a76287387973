use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("root finding did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("quadrature did not reach tolerance: estimated error {error:e} on value {value:e}")]
    Quadrature { value: f64, error: f64 },
    #[error("not locally integrable: {0}")]
    Integrability(String),
    #[error("regime mismatch: {0}")]
    Regime(String),
    #[error("empty scan grid")]
    EmptyScan,
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("empty window: {0}")]
    EmptyWindow(String),
    #[error("time step {dt:e} exceeds stability bound {bound:e}")]
    Stability { dt: f64, bound: f64 },
    #[error("negative cell value {value:e} at cell {cell}")]
    NegativeValue { cell: usize, value: f64 },
    #[error("no bracket found: {0}")]
    NoBracket(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
