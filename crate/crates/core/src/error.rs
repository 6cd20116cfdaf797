use thiserror::Error;

/// Errors raised by the construction, density and witness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed interval: {0}")]
    MalformedInterval(String),

    #[error("invalid address: {0}")]
    InvalidAddress(String),

    #[error("{what} must be positive")]
    NonPositive { what: &'static str },

    #[error("cannot parse rational {input:?}: expected \"p/q\" or an integer")]
    ParseScalar { input: String },

    #[error("degenerate radius range [{lo}, {hi}]")]
    DegenerateRange { lo: String, hi: String },

    #[error("chain is not a nested K-interval chain: {0}")]
    NotNested(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("sequence range exhausted: {0}")]
    RangeExhausted(String),

    #[error("index search exceeded cap {cap} while {during}")]
    CapExceeded { cap: u32, during: String },

    #[error("level {level} cannot be certified at epsilon {epsilon}; needs epsilon <= {required}")]
    NeedsFinerEpsilon {
        level: usize,
        epsilon: String,
        required: String,
    },

    #[error("degenerate component {0} (finite unions must consist of non-degenerate closed intervals)")]
    DegenerateComponent(String),

    #[error("certificate rejected: {0}")]
    Certificate(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
