use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are split by who is at fault: malformed input and exhausted
/// resources are usage problems, while `Inconsistency` means an identity that
/// is a theorem failed numerically, which always points at a bug.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("Frobenius undefined at ramified place {0}")]
    Ramified(String),

    #[error("polynomiality not detected at bound {bound}")]
    PolynomialityNotDetected { bound: usize, partial: Vec<String> },

    #[error("theta vanishes identically; Main Theorem hypotheses violated ({0})")]
    SplitsCompletely(String),

    #[error("unsupported ramification configuration: {0}")]
    UnsupportedRamification(String),

    #[error("inconclusive at precision: {0}")]
    Inconclusive(String),

    #[error("insufficient {kind} precision")]
    Precision { kind: &'static str },

    #[error("mathematical inconsistency: {0}")]
    Inconsistency(String),
}

impl Error {
    /// True when a proven identity failed; the CLI maps this to exit code 2.
    pub fn is_theorem_violation(&self) -> bool {
        matches!(self, Error::Inconsistency(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
