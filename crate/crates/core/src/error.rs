use thiserror::Error;

/// Errors raised by model operations. Parse errors carry a line number.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("undeclared name `{0}`")]
    Undeclared(String),
    #[error("name `{0}` uses the reserved prefix `$`")]
    ReservedName(String),
    #[error("transition `{0}` has an unsatisfiable constraint")]
    Unsatisfiable(String),
    #[error("negative vector has no place size")]
    NegativeVector,
    #[error("orbit is not a transition of the net")]
    UnknownOrbit,
    #[error("budget {budget} is below the target support size {support}")]
    BudgetTooSmall { budget: usize, support: usize },
    #[error("expected a plain VASS without registers and atom places")]
    NotPlain,
    #[error("instance is missing a {0} configuration")]
    MissingConfiguration(&'static str),
    #[error("construction exceeds {limit} orbits")]
    TooLarge { limit: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
