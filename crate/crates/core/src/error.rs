use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("empty community {0}")]
    EmptyCommunity(usize),

    #[error("community {community} has {size} node(s); at least 2 are required")]
    CommunityTooSmall { community: usize, size: usize },

    #[error("invalid window [{first}, {last}] for a sequence of length {len}")]
    Window {
        first: usize,
        last: usize,
        len: usize,
    },

    #[error("phase I needs at least 2 observations, got {0}")]
    PhaseTooShort(usize),

    #[error("smoothing constant must satisfy 0 < lambda <= 1, got {0}")]
    Lambda(f64),

    #[error("run length origin {from} must lie in phase II (after t = {m})")]
    Origin { from: usize, m: usize },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
