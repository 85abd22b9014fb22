use thiserror::Error;

/// Errors raised by matrix construction, state validation, the solvers and
/// the channel routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace} instead of 1")]
    Normalization { trace: f64 },

    #[error("not a positive semidefinite state (most negative eigenvalue {min_eigenvalue:.3e})")]
    NotAState { min_eigenvalue: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("eigensolver did not converge for dim {dim} (off-diagonal residual {residual:.3e})")]
    EigenConvergence { dim: usize, residual: f64 },

    #[error("solver did not stabilize after {iterations} iterations (best value {best_value})")]
    Convergence { iterations: usize, best_value: f64 },

    #[error("random generation failed: {0}")]
    Generation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("instrument completeness violated (worst entry deviation {deviation:.3e})")]
    Completeness { deviation: f64 },

    #[error("Kraus operator {index} is not strictly incoherent")]
    NotStrictlyIncoherent { index: usize },

    #[error("invalid solver configuration: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}
