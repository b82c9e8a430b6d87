use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("k must be at least 2, got {0}")]
    InvalidK(u32),
    #[error("{what} exceeded its limit of {limit}")]
    Budget { what: &'static str, limit: usize },
    #[error("integer overflow: {0}")]
    Overflow(&'static str),
    #[error("cannot parse polynomial {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("empty coefficient word")]
    EmptyWord,
    #[error("not a current violation: {0}")]
    NotViolating(String),
    #[error("rewrite did not move left: {0}")]
    Progress(String),
    #[error("reduction did not terminate within {0} steps")]
    NonTermination(usize),
    #[error("polynomial is not {n}-reduced: {poly}")]
    NotReduced { poly: String, n: i64 },
    #[error("negative leading coefficient: {0}")]
    NegativeLeading(String),
    #[error("no classification row matches: {0}")]
    Unclassified(String),
    #[error("successor case failed: {0}")]
    Successor(String),
    #[error("singular system: {0}")]
    Singular(&'static str),
    #[error("denominator has zero constant term")]
    ZeroConstantTerm,
    #[error("assembly check failed: {0}")]
    Assembly(String),
    #[error("certification mismatch at r = {radius}: series {series}, bfs {bfs}")]
    Certification { radius: usize, series: String, bfs: String },
}

pub type Result<T> = std::result::Result<T, Error>;
