//! Crate-wide error type.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at byte {offset} in {path:?}: {message}")]
    Parse {
        path: PathBuf,
        offset: u64,
        message: String,
    },
    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("degenerate field: observed space contains no {missing} cells, no surface exists")]
    DegenerateField { missing: &'static str },
    #[error("empty field: grid contains no observed cells")]
    EmptyField,
    #[error("zero-gradient window: descriptor cannot be oriented")]
    ZeroGradient,
    #[error("degenerate sample: point pair is (near-)coincident")]
    DegenerateSample,
    #[error("dataset must contain at least two submaps with poses")]
    EmptyDataset,
    #[error("empty precision-recall curve")]
    EmptyCurve,
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("config error: {0}")]
    Config(String),
    #[error("world generation failed: {0}")]
    Generation(String),
    #[error("viewpoint at ({0:.3}, {1:.3}) lies inside an obstacle or off the map")]
    BadViewpoint(f64, f64),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, offset: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            offset,
            message: message.into(),
        }
    }
}
