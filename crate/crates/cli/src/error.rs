use gravac_core::error::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    /// A trajectory failed a runtime invariant after its CSV was produced.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub(crate) fn from_config(e: CoreError) -> Self {
        CliError::Config(e.to_string())
    }

    /// 2 configuration, 3 numerical invariant, 4 non-convergence, 1 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                CoreError::InvalidParameter { .. } | CoreError::DimensionMismatch { .. } => 2,
                CoreError::Invariant(_) | CoreError::IllConditioned { .. } | CoreError::StepUnderflow { .. } => 3,
                CoreError::NonConvergence(_) => 4,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "invariant",
            4 => "non_convergence",
            _ => "io",
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind(), "code": self.exit_code(), "message": self.to_string() }).to_string()
    }
}
