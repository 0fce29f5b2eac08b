use thiserror::Error;

use crate::ring::GradedPoly;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("duplicate coordinate name `{0}`")]
    DuplicateCoordinate(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("invalid coordinate name `{0}`")]
    InvalidCoordinateName(String),
    #[error("element is not invertible (zero constant term)")]
    NotInvertible,
    #[error("{what} is not homogeneous")]
    Inhomogeneous { what: String },
    #[error("{what}: expected degree {expected}, found {found}")]
    WrongDegree {
        what: String,
        expected: i32,
        found: i32,
    },
    #[error("{what}: expected weight {expected}, found {found}")]
    WrongWeight {
        what: String,
        expected: u32,
        found: u32,
    },
    #[error("operator of order {order} exceeds the allowed order {limit}")]
    OrderExceeded { order: u32, limit: u32 },
    #[error("filtration violated: t-index {found}, required at least {required}")]
    Filtration { found: String, required: u32 },
    #[error("obstruction is not a d_Pi-cocycle; residual {residual}")]
    NotACocycle { residual: GradedPoly },
    #[error("section is not a Chevalley-Eilenberg cocycle; residual {residual}")]
    CocycleViolation { residual: GradedPoly },
    #[error("structure fails the Maurer-Cartan equation; residual {residual}")]
    NotMaurerCartan { residual: GradedPoly },
    #[error("structure constants fail D^2 = 0; residual {residual}")]
    NotLInfinity { residual: GradedPoly },
    #[error("unsupported fiber: {0}")]
    UnsupportedFiber(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
