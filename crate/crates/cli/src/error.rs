use thiserror::Error;

/// Process exit codes. These are a stable contract for scripts driving the tool.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const INVALID_STATE: i32 = 3;
    pub const SOLVER_FAILURE: i32 = 4;
    pub const VERIFICATION_FAILURE: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// The input is a valid state but not one the requested computation accepts.
    #[error("{0}")]
    State(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] coherence::Error),
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use coherence::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } => exit::USAGE,
            CliError::State(_) => exit::INVALID_STATE,
            CliError::Core(e) => match e {
                E::Json(_) | E::Config(_) => exit::USAGE,
                E::Dimension(_)
                | E::Shape(_)
                | E::NonFinite
                | E::NotHermitian { .. }
                | E::Normalization { .. }
                | E::NotAState { .. }
                | E::InvalidDistribution(_) => exit::INVALID_STATE,
                E::Convergence { .. } | E::EigenConvergence { .. } => exit::SOLVER_FAILURE,
                E::Generation(_) | E::Precondition(_) | E::Completeness { .. } | E::NotStrictlyIncoherent { .. } => {
                    exit::VERIFICATION_FAILURE
                }
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
