use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("duplicate header `{0}`")]
    DuplicateHeader(String),

    #[error("column `{0}` declared in the schema is missing from the header")]
    MissingColumn(String),

    #[error("row {row}: empty cell in column `{column}`")]
    EmptyCell { row: usize, column: String },

    #[error("row {row}: value `{value}` in column `{column}` is outside the declared domain")]
    DomainViolation {
        row: usize,
        column: String,
        value: String,
    },

    #[error("attribute `{0}` has an empty domain")]
    EmptyDomain(String),

    #[error("unknown value `{value}` for attribute `{attribute}`")]
    UnknownValue { attribute: String, value: String },

    #[error("dataset is not eligible for l'={l_prime}: {reason}")]
    Ineligible { l_prime: usize, reason: String },

    #[error(
        "partitioning failed at iteration {iteration}: only {available} non-empty buckets, need {needed}"
    )]
    PartitionFailed {
        iteration: usize,
        available: usize,
        needed: usize,
    },

    #[error("l'={l_prime} exceeds the domain size {domain_size} of sensitive attribute `{attribute}`")]
    DomainTooSmall {
        attribute: String,
        domain_size: usize,
        l_prime: usize,
    },

    #[error("retention probability {p} differs from 1/l' and breaks the privacy guarantee; enable unsafe test mode to use it")]
    UnsafeProbability { p: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown tuple id {0}")]
    UnknownId(u64),

    #[error("ambiguous match: {0}")]
    AmbiguousMatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by a configuration that cannot be satisfied
    /// (as opposed to malformed input data).
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::Ineligible { .. }
                | Error::PartitionFailed { .. }
                | Error::DomainTooSmall { .. }
                | Error::UnsafeProbability { .. }
        )
    }
}
