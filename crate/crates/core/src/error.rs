use std::path::PathBuf;

/// Errors produced anywhere in the selection pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),

    /// Input data violates a dataset invariant (missing cells, bad labels, ...).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A configuration value is outside its admissible range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An operation precondition does not hold for the given arguments.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Repeated resampling kept producing unusable partitions.
    #[error("degenerate partition: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::InvalidData(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
