use thiserror::Error;

use crate::sdp::SolveStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("solver finished with status {status:?} (gap {gap:.3e}, residual {residual:.3e})")]
    Solver {
        status: SolveStatus,
        gap: f64,
        residual: f64,
    },

    #[error("all {restarts} see-saw restarts failed; last error: {last}")]
    AllRestartsFailed { restarts: usize, last: String },

    #[error("moment program is unbounded")]
    Unbounded,

    #[error("{0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for bad input, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::ModelFormat(_) | Error::Io(_) => 2,
            Error::Solver { .. } | Error::AllRestartsFailed { .. } | Error::Unbounded => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
