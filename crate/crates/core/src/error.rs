use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A type invariant does not hold for the supplied data.
    #[error("invariant violated: {what} (measured {measured:.3e}, tolerance {tolerance:.1e})")]
    Invariant {
        what: &'static str,
        measured: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("numerical consistency check failed: {0}")]
    NumericalConsistency(String),

    #[error(
        "ambiguous frequency grouping: tolerance {epsilon:.3e} is not below a quarter of the \
         smallest level spacing {spacing:.3e}"
    )]
    AmbiguousGrouping { epsilon: f64, spacing: f64 },

    #[error(
        "unsupported model: bath {bath} has a nonzero zero-frequency jump operator \
         (norm {norm:.3e}); a flat spectral density diverges at omega = 0, use an ohmic density"
    )]
    ZeroFrequencyDivergence { bath: usize, norm: f64 },

    #[error("steady state is not unique: null space has dimension {dimension}")]
    NonUniqueSteadyState { dimension: usize },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("integration accuracy lost: {what} reached {value:.3e}; retry with a step smaller than {step:.3e}")]
    Accuracy {
        what: &'static str,
        value: f64,
        step: f64,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),
}

impl Error {
    /// Errors raised by the numerics rather than by malformed input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NonUniqueSteadyState { .. }
                | Error::SolverFailure(_)
                | Error::Accuracy { .. }
                | Error::NumericalConsistency(_)
        )
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
