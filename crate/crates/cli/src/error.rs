use thiserror::Error;

/// Top-level failure classes; the numeric exit codes are part of the
/// documented interface (0 ok, 2 config error, 3 numerical failure).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    /// Wrap a stage error as a numerical failure.
    pub fn numeric(e: impl std::fmt::Display) -> Self {
        CliError::Numeric(e.to_string())
    }

    /// A missing or unreadable stage input: the stage-dependency invariant
    /// of the configuration is violated.
    pub fn missing_input(stage: &str, e: impl std::fmt::Display) -> Self {
        CliError::Config(format!(
            "stage `{stage}` cannot read its input ({e}); run the upstream stages first"
        ))
    }
}
