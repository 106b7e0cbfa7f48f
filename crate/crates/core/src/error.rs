use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the mesh/result model, file readers/writers and operators.
#[derive(Error, Debug)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("HDF5 error: {0}")]
    Hdf5(#[from] hdf5::Error),

    /// A required group, dataset or attribute is missing or has the wrong shape.
    #[error("malformed file: {path}: {reason}")]
    Malformed { path: String, reason: String },

    #[error("unknown element type code {0}")]
    UnknownElementCode(i32),

    #[error("multi-step {requested} not found (available: {available:?})")]
    MissingMultiStep { requested: u32, available: Vec<u32> },

    #[error("unknown region '{0}'")]
    UnknownRegion(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid result array: {0}")]
    InvalidResult(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system: {0}; use a smoothing parameter > 0 or remove duplicate points")]
    SingularMatrix(String),

    /// Text/binary parser failure with the 1-based line (0 when not line oriented).
    #[error("{format} parse error at line {line}: {message}")]
    Parse {
        format: &'static str,
        line: usize,
        message: String,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn malformed(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    /// True for errors caused by bad user input (missing files, malformed data,
    /// invalid arguments) as opposed to numerical or internal failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Hdf5(_) | Error::SingularMatrix(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
