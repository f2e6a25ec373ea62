use thiserror::Error;

/// Errors produced by the model, its configuration loader and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config line {line}: {message}")]
    ConfigParse {
        line: usize,
        key: Option<String>,
        message: String,
    },

    #[error("config key `{key}`: {message}")]
    ConfigInvariant { key: String, message: String },

    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("covered length {covered_nm} nm must be positive")]
    DegenerateCoverage { covered_nm: f64 },

    #[error("invalid pattern `{input}`: {reason}")]
    InvalidPattern { input: String, reason: String },

    #[error("{domains} domains exceeds the supported maximum of {max}")]
    DomainCountTooLarge { domains: usize, max: usize },

    #[error("{domains} domains is below the required minimum of {min}")]
    DomainCountTooSmall { domains: usize, min: usize },

    #[error("clusters {weight_low} and {} overlap (margin {margin_volts:e} V)", weight_low + 1)]
    ClustersOverlap { weight_low: usize, margin_volts: f64 },

    #[error("misalignment {offset_nm} nm exceeds one notch length ({limit_nm} nm)")]
    OffsetOutOfRange { offset_nm: f64, limit_nm: f64 },

    #[error("parallel network has no resistors")]
    EmptyNetwork,

    #[error("invalid analysis setup: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
