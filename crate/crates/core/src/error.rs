use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("invalid initial data: {0}")]
    InitialData(String),

    #[error("tridiagonal solve broke down at row {row} (pivot {pivot:e}); time step too large?")]
    Tridiagonal { row: usize, pivot: f64 },

    #[error("non-finite value in {field} at node {node}")]
    NonFinite { field: &'static str, node: usize },

    #[error("solver failed at t = {t}: {source}")]
    Step {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("bisection did not bracket a root: {0}")]
    Bracket(String),

    #[error("test function violates support requirement: {0}")]
    Support(String),

    #[error("time sampling too coarse: {0}")]
    Cadence(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
