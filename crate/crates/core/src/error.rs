use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("training matrix is rank deficient (need rank {required})")]
    RankDeficient { required: usize },

    /// A configuration value violates an invariant. `keys` names every
    /// offending key.
    #[error("invalid configuration ({}): {message}", keys.join(", "))]
    Config { keys: Vec<String>, message: String },

    #[error("cannot parse configuration: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(keys: &[&str], message: impl Into<String>) -> Self {
        Error::Config {
            keys: keys.iter().map(|k| k.to_string()).collect(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
