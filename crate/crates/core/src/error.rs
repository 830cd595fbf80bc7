use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node index {index} out of range for graph with {num_nodes} nodes")]
    InvalidNode { index: usize, num_nodes: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("model shape error: {0}")]
    ModelShape(String),

    #[error("class index {class} out of range for a model with {num_classes} classes")]
    ClassOutOfRange { class: usize, num_classes: usize },

    #[error("capacity exceeded: {what} supports at most {cap} players, got {n}")]
    Capacity { what: &'static str, n: usize, cap: usize },

    #[error("value oracle failed: {0}")]
    Oracle(String),

    /// A sampling run stopped early; `completed` samples had finished.
    #[error("sample {sample} failed after {completed} completed samples: {source}")]
    Sampling {
        sample: usize,
        completed: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        match self {
            Error::Capacity { .. } => true,
            Error::Sampling { source, .. } => source.is_capacity(),
            _ => false,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
