use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("spec error: {0}")]
    Spec(String),
    #[error("solver error: {msg} (primal {primal}, dual {dual})")]
    Solver { msg: String, primal: f64, dual: f64 },
    #[error("oracle error: {0}")]
    Oracle(String),
    #[error("schedule error at k={k}: {msg}")]
    Schedule { k: usize, msg: String },
    #[error("separation error: {0}")]
    Separation(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("group error: {0}")]
    Group(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) => 2,
            Error::Solver { .. } | Error::Oracle(_) => 3,
            _ => 1,
        }
    }
}
