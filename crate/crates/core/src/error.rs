use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Index or value outside the documented domain of an operation.
    #[error("out of range: {0}")]
    Range(String),

    /// A caller broke an operation's contract (wrong arguments for the mode,
    /// invalid action from a policy, missing successor model, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("config error at line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("policy error: {0}")]
    Policy(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigLine { .. } | Error::Calibration(_) | Error::Io { .. } => 2,
            Error::Numerical(_) => 3,
            Error::Range(_)
            | Error::Contract(_)
            | Error::State(_)
            | Error::Shape { .. }
            | Error::Data(_)
            | Error::Policy(_) => 4,
        }
    }
}
