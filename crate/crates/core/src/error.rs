use thiserror::Error;

use crate::modes::ModeSet;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode labels must be positive and strictly increasing, got {0:?}")]
    InvalidModeSet(Vec<u32>),
    #[error("{0} modes requested; at most {max} are supported", max = crate::modes::MAX_MODES)]
    TooManyModes(usize),
    #[error("mode {mode} is not in {modes}")]
    ModeNotFound { mode: u32, modes: ModeSet },
    #[error("{sub} is not a subset of {sup}")]
    NotSubset { sub: ModeSet, sup: ModeSet },
    #[error("mode sets {0} and {1} overlap")]
    Overlapping(ModeSet, ModeSet),
    #[error("mode sets differ: {0} vs {1}")]
    ModeMismatch(ModeSet, ModeSet),
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Dimension {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid monomial assignment: {0}")]
    InvalidAssignment(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical fault: {0}")]
    Numerical(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
