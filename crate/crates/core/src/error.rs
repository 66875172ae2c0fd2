use std::collections::BTreeMap;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate declaration `{declaration}` in project `{project}`")]
    DuplicateDeclaration {
        line: usize,
        project: String,
        declaration: String,
    },

    #[error("line {line}: records of project `{project}` are not contiguous")]
    NonContiguousProject { line: usize, project: String },

    #[error("line {line}: duplicate snippet key `{key}`")]
    DuplicateSnippet { line: usize, key: String },

    #[error("corpus contains no projects")]
    EmptyCorpus,

    #[error("project `{0}` is not among the neighbor projects")]
    NotANeighbor(String),

    #[error("no similar declaration carries context for the query")]
    NoContext,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("every testing project was skipped: {0:?}")]
    AllSkipped(BTreeMap<String, usize>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
