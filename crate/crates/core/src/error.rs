use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("shape error: {0}")]
    ShapeError(String),
    #[error("invalid field characteristic {0}: need a prime in 2..=97")]
    InvalidField(u32),
    #[error("objects belong to different categories")]
    CategoryMismatch,
    #[error("index {0} out of range")]
    IndexError(usize),
    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("subspace family is not a subrepresentation")]
    NotASubmodule,
    #[error("representation has a summand outside the reflection subcategory")]
    NotInSubcategory,
    #[error("structure constant routes disagree: {0}")]
    ConversionMismatch(String),
    #[error("middle term differential does not square to zero")]
    SignConventionBroken,
    #[error("degree {0} outside the supported window")]
    WindowExceeded(i32),
    #[error("precondition failed: {0}")]
    PreconditionError(String),
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
