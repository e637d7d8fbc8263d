use thiserror::Error;

use crate::action::GroupElement;
use crate::measure::Atom;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("construction error: {0}")]
    Construction(String),

    #[error("nonpositive or non-finite weight {weight} at atom {atom}")]
    BadWeight { atom: Atom, weight: f64 },

    #[error("atom {0} is not in the space")]
    UnknownAtom(Atom),

    #[error("exploration limit exceeded applying t={t} to atom {atom}: coordinate {coordinate} beyond {limit}")]
    ExplorationLimit {
        atom: Atom,
        t: GroupElement,
        coordinate: i64,
        limit: i64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid function value {value} at atom {atom}")]
    BadValue { atom: Atom, value: f64 },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cocycle violation at t={t}, u={u}, s={atom}: relative deviation {deviation:e}")]
    CocycleViolation {
        t: GroupElement,
        u: GroupElement,
        atom: Atom,
        deviation: f64,
    },
}
