use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("instance too large for exhaustive search: n = {n} exceeds {limit}")]
    SizeLimit { n: usize, limit: usize },

    #[error("eigensolver did not converge after {iterations} iterations (best estimate {estimate})")]
    Numeric { iterations: usize, estimate: f64 },

    #[error("degenerate embedding: {0}")]
    DegenerateEmbedding(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("oracle fault at iteration {iteration}: {reason}")]
    OracleFault { iteration: usize, reason: String },

    #[error("oracle starvation: {trials} trials produced at most {best} long pairs (needed {needed})")]
    OracleStarvation {
        trials: usize,
        best: usize,
        needed: usize,
    },

    #[error("inconclusive after {rounds} rounds: {detail}")]
    Inconclusive { rounds: usize, detail: String },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
