use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {dim} outside the supported range 1..={cap}")]
    DimensionOutOfRange { dim: usize, cap: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("element is not hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("basis is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("element is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositive { eigenvalue: f64 },

    #[error("observables do not commute (max |[a,b]| = {deviation:e}); no common context exists")]
    NonCommuting { deviation: f64 },

    #[error("physical state {identity:?} is irrelevant for the observable (off-diagonal {deviation:e})")]
    IrrelevantState { identity: Option<u64>, deviation: f64 },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("direction is not a unit vector (norm {norm})")]
    InvalidDirection { norm: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("postulate violated: {0}")]
    PostulateViolation(String),

    #[error("GNS check `{check}` failed (deviation {deviation:e})")]
    GnsCheck { check: &'static str, deviation: f64 },

    #[error("model invariant violated: {0}")]
    ModelInvariant(String),
}

impl Error {
    /// Failures of the numerics rather than of the caller or the model.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::NonFinite | Error::NotUnitary { .. }
        )
    }

    /// Violations of a model law (anticorrelation, postulates, GNS checks,
    /// identity reuse).
    pub fn is_model_violation(&self) -> bool {
        matches!(
            self,
            Error::ModelInvariant(_) | Error::PostulateViolation(_) | Error::GnsCheck { .. }
        )
    }
}
