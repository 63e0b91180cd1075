use thiserror::Error;

pub type Result<T> = std::result::Result<T, AbcError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbcError {
    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NonSymmetric { max_asymmetry: f64 },

    #[error("matrix is not positive definite (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("{what}: expected dimension {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{proposals} proposals reached the cap with only {accepted} acceptances")]
    ProposalCapExceeded { proposals: u64, accepted: u64 },

    #[error("disk quadrature did not converge within {nodes} nodes")]
    QuadratureNotConverged { nodes: usize },

    #[error("bias constant {c:e} is too close to zero")]
    DegenerateCurvature { c: f64 },

    #[error("schedule gives n = {value} < 1 at delta = {delta}")]
    ScheduleUnderflow { delta: f64, value: f64 },

    #[error("least-squares design matrix is singular")]
    SingularDesign,

    #[error("fitted coefficients are not both positive (a = {a:e}, b = {b:e})")]
    NegativeCoefficient { a: f64, b: f64 },

    #[error("coefficients must be positive and finite (a = {a}, b = {b}, q = {q})")]
    InvalidCoefficients { a: f64, b: f64, q: u32 },

    #[error("log-log fit needs strictly positive inputs, got {0}")]
    NonPositiveInput(f64),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("pilot run accepted none of its {proposals} proposals")]
    PilotFailed { proposals: u64 },
}

impl AbcError {
    /// Short kebab-case identifier, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            AbcError::NonSymmetric { .. } => "non-symmetric",
            AbcError::NotPositiveDefinite { .. } => "not-positive-definite",
            AbcError::DimensionMismatch { .. } => "dimension-mismatch",
            AbcError::InvalidArgument(_) => "invalid-argument",
            AbcError::ProposalCapExceeded { .. } => "proposal-cap-exceeded",
            AbcError::QuadratureNotConverged { .. } => "quadrature-not-converged",
            AbcError::DegenerateCurvature { .. } => "degenerate-curvature",
            AbcError::ScheduleUnderflow { .. } => "schedule-underflow",
            AbcError::SingularDesign => "singular-design",
            AbcError::NegativeCoefficient { .. } => "negative-coefficient",
            AbcError::InvalidCoefficients { .. } => "invalid-coefficients",
            AbcError::NonPositiveInput(_) => "non-positive-input",
            AbcError::TooFewPoints { .. } => "too-few-points",
            AbcError::PilotFailed { .. } => "pilot-failed",
        }
    }
}
