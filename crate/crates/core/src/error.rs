use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty sequence")]
    EmptySequence,

    #[error("budget {budget} too small, need at least {required}")]
    BudgetTooSmall { budget: usize, required: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not a Γ pair: 1/{q0} != 1/{q1} + 1/{pstar}")]
    NotGammaPair { q0: f64, q1: f64, pstar: f64 },

    #[error("exponent identity violated: {0}")]
    ExponentIdentity(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("zero right-hand side in summing ratio")]
    ZeroDenominator,

    #[error("linear program infeasible (witness {witness})")]
    Infeasible { witness: usize },

    #[error("linear program unbounded")]
    Unbounded,

    #[error("degenerate domination: every atom annihilates the functional (witness {witness})")]
    DegenerateMeasure { witness: usize },

    #[error("no convergence: {0}")]
    NonConvergence(String),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Infeasible { .. }
                | Error::Unbounded
                | Error::DegenerateMeasure { .. }
                | Error::NonConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
