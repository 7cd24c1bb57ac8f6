use thiserror::Error;

/// Errors produced by the estimation and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sample value {0} lies outside [0,1)")]
    SampleOutOfRange(f64),
    #[error("depth {0} exceeds the supported maximum of {1}")]
    DepthTooLarge(usize, usize),
    #[error("truth resolution must lie in 1..=16, got {0}")]
    ResolutionOutOfRange(usize),
    #[error("unknown truth kind {0:?} (expected triangular | exp-brownian | mixed | sine)")]
    UnknownTruthKind(String),
    #[error("mass-split parameter a must be positive, got {0}")]
    NonPositiveBetaParam(f64),
    #[error("split-decay parameter gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("flat-initialisation level {flat} exceeds maximum depth {max_depth}")]
    FlatInitTooDeep { flat: usize, max_depth: usize },
    #[error("count table depth {counts} does not match prior depth {prior}")]
    DepthMismatch { counts: usize, prior: usize },
    #[error("significance level must lie strictly inside (0,1), got {0}")]
    InvalidLevel(f64),
    #[error("quantile radius needs at least {min} posterior draws, got {got}")]
    TooFewDraws { got: usize, min: usize },
    #[error("exhaustive tree enumeration is limited to depth {max}, got {got}")]
    EnumerationTooDeep { got: usize, max: usize },
    #[error("weight exponent shift delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("node set is not a full binary tree: {0}")]
    InvalidTree(String),
    #[error("cells do not form a dyadic partition of [0,1): {0}")]
    InvalidPartition(String),
    #[error("invalid count table: {0}")]
    InvalidCounts(String),
    #[error("{path}:{line}: cannot parse sample value {text:?}")]
    MalformedSample {
        path: String,
        line: usize,
        text: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error on {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn json(path: &std::path::Path, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.display().to_string(),
            source,
        }
    }
}
