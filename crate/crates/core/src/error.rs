use std::path::PathBuf;

use thiserror::Error;

use crate::taxonomy::CategoryCode;

#[derive(Debug, Error)]
pub enum TkgError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}, field `{field}`: {message}")]
    MalformedRow {
        line: u64,
        field: String,
        message: String,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("unknown category code `{0}`")]
    UnknownCategory(String),

    #[error("duplicate paper_id `{0}`")]
    DuplicatePaperId(String),

    #[error("paper `{paper_id}` has year {year}, outside the period coverage {min}-{max}")]
    YearOutOfRange {
        paper_id: String,
        year: i32,
        min: i32,
        max: i32,
    },

    #[error("invalid taxonomy: {0}")]
    InvalidTaxonomy(String),

    #[error("invalid period specification: {0}")]
    InvalidPeriods(String),

    #[error("period has no records")]
    EmptyPeriod,

    #[error("node {0} is not in the graph")]
    UnknownNode(CategoryCode),

    #[error("edge ({0}, {1}) is not in the graph")]
    UnknownEdge(CategoryCode, CategoryCode),

    #[error("edge ({0}, {1}) does not connect two different partitions")]
    NotTripartite(CategoryCode, CategoryCode),

    #[error("graph needs at least {required} nodes, has {actual}")]
    TooFewNodes { required: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl TkgError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TkgError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, TkgError>;
