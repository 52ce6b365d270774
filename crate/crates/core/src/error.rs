use thiserror::Error;

/// Errors produced by the estimators, tests and I/O layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("degenerate group: {0}")]
    DegenerateGroup(String),

    #[error("degenerate proportion: pooled no-purchase proportion is {0}")]
    DegenerateProportion(f64),

    #[error("parameter on the boundary: {0}")]
    BoundaryParam(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(
        "constrained fit did not converge after {iterations} iterations \
         (constraint violation {constraint_violation:e}, KKT residual {kkt_residual:e})"
    )]
    Convergence {
        iterations: usize,
        constraint_violation: f64,
        kkt_residual: f64,
    },

    #[error("sample size search exceeded n_max = {n_max} (last power {last_power:.4})")]
    SearchExhausted {
        n_max: usize,
        last_power: f64,
        trace: Vec<(usize, f64)>,
    },

    #[error("format error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Format { row: Option<usize>, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
