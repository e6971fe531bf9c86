use thiserror::Error;

/// Errors surfaced by the optimizer library.
///
/// Everything that can go wrong from bad caller input is reported through
/// this type; internal numerical fallbacks (e.g. a Gaussian-process fit that
/// falls back to the previous generation's model) are reported as warnings on
/// the affected generation record instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid bounds: lower[{index}] = {lower} must be strictly below upper[{index}] = {upper}")]
    InvalidBounds {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("{what} must not be empty")]
    EmptySet { what: String },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("unknown problem identifier: {0}")]
    UnknownProblem(String),

    #[error("hypervolume is only implemented for two objectives, got {0}")]
    UnsupportedObjectives(usize),

    #[error("rank-sum test needs at least {required} samples per side, got {got}")]
    SampleTooSmall { required: usize, got: usize },

    #[error("Gaussian process fit failed: {0}")]
    GpFitFailed(String),

    #[error("individual was already evaluated (eval index {0})")]
    AlreadyEvaluated(u64),

    #[error("schema version mismatch: file has {found}, this build reads {supported}")]
    SchemaMismatch { found: u32, supported: u32 },

    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON at {path}: {source}")]
    Format {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
