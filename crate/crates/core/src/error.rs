use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(
        "positivity violated at t={t}: cell {cell} has θh*={value:e} (bound {bound:e}); time step too large"
    )]
    Positivity {
        t: f64,
        cell: usize,
        value: f64,
        bound: f64,
    },

    #[error("time step {dt:e} fell below the minimum {dt_min:e} at t={t}")]
    TimeStepTooSmall { t: f64, dt: f64, dt_min: f64 },

    #[error("source solve did not converge in cell {cell} after {iterations} iterations")]
    NonConvergence { cell: usize, iterations: usize },

    #[error("unsupported Riemann wave pattern: {0}")]
    UnsupportedWavePattern(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
