use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    Alphabet(String),
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("ill-sorted formula: {0}")]
    IllSorted(String),
    #[error("invalid structure: {0}")]
    Structure(String),
    #[error("assignment has no value for {0}")]
    AssignmentGap(String),
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("enumeration aborted: {0}")]
    ResourceLimit(String),
    #[error("invalid pool: {0}")]
    Pool(String),
    #[error("invalid protocol configuration: {0}")]
    Config(String),
    #[error("invalid move: {0}")]
    Move(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
