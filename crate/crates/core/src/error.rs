use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scalar literal `{literal}`: {reason}")]
    ScalarLiteral { literal: String, reason: String },

    #[error("radicand {0} is not square-free")]
    NotSquareFree(i64),

    #[error("radicand {0} was not declared in the scalar context")]
    UndeclaredRadicand(i64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("series error: {0}")]
    Series(String),

    #[error("edge numerator not divisible; R-matrix not unitary (total degree {0})")]
    NotDivisible(u32),

    #[error("inconsistent character table: {0}")]
    CharacterTable(String),

    #[error("degenerate pairing (bad weight specialization)")]
    DegeneratePairing,

    #[error("invalid target: {0}")]
    Target(String),

    #[error("genus-zero data inconsistent with classical limit: {0}")]
    ClassicalLimit(String),

    #[error("quantum product not associative for basis triple ({a}, {b}, {c}) at degree {degree}")]
    Associativity {
        a: usize,
        b: usize,
        c: usize,
        degree: u32,
    },

    #[error("invalid genus-zero data: {0}")]
    GenusZero(String),

    #[error("unstable (g, k) = ({0}, {1}): need 2g - 2 + k > 0")]
    Unstable(u32, u32),

    #[error("canonical coordinates degenerate at truncation order")]
    DegenerateCoordinates,

    #[error("boundary matrix conflicts with the QDE at z^{order}, entry ({row}, {col})")]
    BoundaryConflict {
        order: usize,
        row: usize,
        col: usize,
    },

    #[error("z-order {have} too low for this computation, need at least {need}")]
    ZOrderTooLow { have: usize, need: usize },

    #[error("descendent mode requires an S-operator")]
    MissingSOperator,

    #[error("dilaton leaf height {0} is below 2")]
    DilatonHeight(u32),

    #[error("direction {0} is not flagged as a degree-2 divisor direction")]
    NotDivisorDirection(usize),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by the command-line front end for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Validation,
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Internal(_) | Error::DegenerateCoordinates => ErrorClass::Internal,
            Error::Associativity { .. }
            | Error::NotDivisible(_)
            | Error::ClassicalLimit(_)
            | Error::BoundaryConflict { .. }
            | Error::CharacterTable(_)
            | Error::DegeneratePairing => ErrorClass::Validation,
            _ => ErrorClass::Config,
        }
    }
}
