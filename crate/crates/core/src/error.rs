use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("query syntax: {0}")]
    QuerySyntax(String),

    #[error("unsupported SPARQL feature: {0}")]
    Unsupported(String),

    #[error("query graph is not connected")]
    Disconnected,

    #[error("query has {0} vertices; at most 64 are supported")]
    QueryTooLarge(usize),

    #[error("query has no triple patterns")]
    EmptyQuery,

    #[error("{0} is not a variable vertex of the query")]
    UnknownVariable(String),

    #[error("fragment count must be at least 1")]
    ZeroFragments,

    #[error("vertex {0} has no fragment assignment")]
    UnassignedVertex(String),

    #[error("partition: {0}")]
    Partition(String),

    #[error("partition file line {line}: {message}")]
    PartitionFile { line: usize, message: String },

    #[error("features from more than one fragment: {0} and {1}")]
    MixedFragments(i32, i32),

    #[error("features are not joinable")]
    NotJoinable,

    #[error("bit vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("bit vectors describe different variables: {0} vs {1}")]
    VariableMismatch(u16, u16),

    #[error("bit vector length must be at least 1")]
    ZeroLength,

    #[error("oracle refused: {0}")]
    OracleTooLarge(String),

    #[error("runtime: {0}")]
    Runtime(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes, used by the command line to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Data,
    Query,
    Partition,
    Other,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. } => ErrorClass::Data,
            Error::QuerySyntax(_)
            | Error::Unsupported(_)
            | Error::Disconnected
            | Error::QueryTooLarge(_)
            | Error::EmptyQuery
            | Error::UnknownVariable(_) => ErrorClass::Query,
            Error::ZeroFragments
            | Error::UnassignedVertex(_)
            | Error::Partition(_)
            | Error::PartitionFile { .. } => {
                ErrorClass::Partition
            }
            _ => ErrorClass::Other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
