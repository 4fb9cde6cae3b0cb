//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("jacobian sample {index} is {value}, below the -1e-9 tolerance")]
    NegativeJacobian { index: usize, value: f64 },

    #[error("adaptive quadrature stalled: requested {tol:e}, reached {reached:e}")]
    QuadratureNonConvergence { tol: f64, reached: f64 },

    #[error("radial profile is not strictly increasing near t = {at}")]
    NonMonotoneProfile { at: f64 },

    #[error("matrix field is not symmetric positive definite at sample {index}")]
    NotSpd { index: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("bad file format: {0}")]
    Format(String),

    #[error("bad configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
