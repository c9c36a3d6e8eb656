use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("basis is singular (|det| = {det_abs:e}, threshold {threshold:e})")]
    SingularBasis { det_abs: f64, threshold: f64 },

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("ball of radius {radius} would hold about {predicted:.0} points, above the cap of {cap}")]
    BallTooLarge { radius: f64, predicted: f64, cap: u64 },

    #[error("rule `{rule}` needs dimension {expected}, lattice has dimension {actual}")]
    RuleDimensionMismatch {
        rule: &'static str,
        expected: &'static str,
        actual: usize,
    },

    #[error("comb is not an indicator comb: weight {re}+{im}i at {at}")]
    NotAnIndicatorComb { at: String, re: f64, im: f64 },

    #[error("malformed comb file at line {line}: {message}")]
    MalformedCombFile { line: usize, message: String },

    #[error("malformed lattice file at line {line}: {message}")]
    MalformedLatticeFile { line: usize, message: String },

    #[error("z range {z_max} exceeds the data range 2*cutoff = {limit}")]
    ZRangeExceedsData { z_max: f64, limit: f64 },

    #[error("lattice vector {0} is not in the autocorrelation table")]
    NotTabulated(String),

    #[error("bump radius {epsilon} exceeds half the packing radius ({limit})")]
    EpsilonTooLarge { epsilon: f64, limit: f64 },

    #[error("point {0} is not a dual lattice point (deviation {1:e})")]
    NotADualLatticePoint(String, f64),

    #[error("empirical density {density} is not within 5% of half the lattice density {half}")]
    DensityNotHalf { density: f64, half: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through file context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::File { source, .. } => source.root(),
            other => other,
        }
    }
}
