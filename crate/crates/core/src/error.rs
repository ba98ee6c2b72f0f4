use thiserror::Error;

/// Errors surfaced by the numeric core and the training harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context}: left is {left:?}, right is {right:?}")]
    Dimension {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("index {index} out of range for {what} of length {len}")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn dim(context: &'static str, left: (usize, usize), right: (usize, usize)) -> Self {
        Error::Dimension {
            context,
            left,
            right,
        }
    }
}
