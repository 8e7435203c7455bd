use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}: cannot parse {cell:?} as a number")]
    Parse { row: usize, cell: String },

    #[error("row {row}: missing value column {column}")]
    MissingColumn { row: usize, column: String },

    #[error("fewer than 2 observations ({0})")]
    TooFewObservations(usize),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value at index {index} is {value}; log returns need strictly positive values")]
    NonPositive { index: usize, value: f64 },

    #[error("constant series: min-max normalization needs a nonzero range")]
    ZeroRange,

    #[error("series of length {len} too short for m={m}, tau={tau}")]
    SeriesTooShort { len: usize, m: usize, tau: usize },

    #[error("embedding component outside [0, 1] at point {0}")]
    NotNormalized(usize),

    #[error("no box has at least {0} passes")]
    NoQualifyingBoxes(usize),

    #[error("embedding has {points} points; at least {needed} needed")]
    EmbeddingTooShort { points: usize, needed: usize },

    #[error("no admissible initial neighbor for the fiducial point")]
    NoInitialNeighbor,

    #[error("no admissible point pairs (theiler window {0})")]
    NoAdmissiblePairs(usize),

    #[error("{0}")]
    InsufficientData(String),

    #[error("non-finite state at integration step {0}")]
    Diverged(usize),

    #[error("unknown format {0:?}")]
    UnknownFormat(String),

    #[error("nothing to render")]
    EmptyInput,

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Problems with the input or the requested parameters, as opposed to an
    /// estimator that could not produce a value.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::Parse { .. }
                | Error::MissingColumn { .. }
                | Error::TooFewObservations(_)
                | Error::NonFinite(_)
                | Error::InvalidParameter(_)
                | Error::NonPositive { .. }
                | Error::ZeroRange
                | Error::SeriesTooShort { .. }
                | Error::UnknownFormat(_)
                | Error::EmptyInput
                | Error::Json(_)
        )
    }
}
