use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("CFL condition violated: D*dt/dx^2 = {ratio:.6} > 0.5")]
    Cfl { ratio: f64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("run result lacks data for {0}")]
    MissingSnapshot(String),

    #[error("target not bracketed: {0}")]
    Bracket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the category of failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidGrid(_) | Error::InvalidParam { .. } | Error::Config(_) => 2,
            Error::Cfl { .. } => 3,
            Error::LengthMismatch { .. } | Error::MissingSnapshot(_) | Error::Bracket(_) => 4,
            Error::Io(_) | Error::Csv(_) => 5,
        }
    }
}
