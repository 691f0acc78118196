use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("gram matrix is not positive definite after jitter {jitter:e}: pivot {index} = {pivot:e}")]
    NotPositiveDefinite { index: usize, pivot: f64, jitter: f64 },

    #[error("every probe of the acquisition surface was non-finite")]
    NoFiniteProbe,

    #[error("tabular lookup failed for {query:?}; nearest stored point is {nearest:?}")]
    TabularMiss { query: Vec<f64>, nearest: Vec<f64> },

    #[error("tabular dataset is missing {} truth-grid point(s): {gaps:?}", gaps.len())]
    MissingGridPoints { gaps: Vec<Vec<f64>> },

    #[error("{path}: row {row}, column `{column}`: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("duplicate points in dataset at rows {first} and {second}")]
    DuplicatePoint { first: usize, second: usize },

    #[error("unknown problem `{0}` (expected mc2d, mc3d or sin2d)")]
    UnknownProblem(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable snake_case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::InvalidArgument(_) => "invalid_argument",
            Self::DimensionMismatch { .. } => "dimension_mismatch",
            Self::NotPositiveDefinite { .. } => "not_positive_definite",
            Self::NoFiniteProbe => "no_finite_probe",
            Self::TabularMiss { .. } => "tabular_miss",
            Self::MissingGridPoints { .. } => "missing_grid_points",
            Self::Parse { .. } => "parse",
            Self::DuplicatePoint { .. } => "duplicate_point",
            Self::UnknownProblem(_) => "unknown_problem",
            Self::Io(_) => "io",
            Self::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
