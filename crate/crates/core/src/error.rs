use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lattice size {0} is too small (need L >= 2)")]
    LatticeTooSmall(usize),
    #[error("{what} index {index} out of range (count {count})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        count: usize,
    },
    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("probability {0} outside its allowed range")]
    InvalidProbability(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("odd number of defects ({0}) on a closed surface")]
    OddDefectCount(usize),
    #[error("correction did not clear the syndrome")]
    CorrectionFailed,
    #[error("lattice too large for exhaustive enumeration (L = {0})")]
    TooLargeForEnumeration(usize),
    #[error("empty annealing schedule")]
    EmptySchedule,
    #[error("degenerate series: {0}")]
    DegenerateSeries(&'static str),
    #[error("parse error: {0}")]
    Parse(&'static str),
}
