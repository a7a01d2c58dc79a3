use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{n} hypotheses cannot be split evenly over {d} nodes")]
    IndivisibleNodes { n: usize, d: usize },

    #[error("invalid null placement: {0}")]
    Placement(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite test statistic {0}")]
    NonFinite(f64),

    #[error("p-value {value} for hypothesis {id} is outside [0, 1]")]
    PValueRange { id: usize, value: f64 },

    #[error("hypothesis {id} does not belong to node {node}")]
    ForeignHypothesis { id: usize, node: usize },

    #[error("hypothesis {0} appears more than once")]
    DuplicateHypothesis(usize),

    #[error("unknown hypothesis id {0}")]
    UnknownHypothesis(usize),

    #[error("estimator `{0}` needs at least one sample")]
    EmptySamples(&'static str),

    #[error("sample lengths do not line up: {0}")]
    Misaligned(String),

    #[error("{what} is limited to n <= {limit}, got {got}")]
    SizeGuard { what: &'static str, limit: usize, got: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
