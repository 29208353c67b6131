use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SewError {
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range (valid up to {max})")]
    OutOfRange { index: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("ratio undefined for the zero vector")]
    ZeroVector,

    #[error("no convergence after {iterations} iterations (best value {best})")]
    NonConvergence { iterations: usize, best: f64 },

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("budget exceeded: {needed} centers requested, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    /// A theorem hypothesis (smoothness, exponent range, admissible parameter) does not hold.
    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("input sequence is not monotone at position {0}")]
    NonMonotone(usize),

    #[error("block layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("spectrum exhausted at index {needed}; extend the spectrum beyond {available}")]
    ExtendSpectrum { needed: usize, available: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

impl SewError {
    /// True for errors that signal a violated theorem hypothesis rather than a bug or bad input.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(self, SewError::HypothesisViolation(_))
    }
}

pub type Result<T> = std::result::Result<T, SewError>;
