use serde::Serialize;

/// Failure classes with fixed exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Solver(_) => "solver",
            CliError::Io(_) => "io",
        }
    }

    pub fn record(&self, command: &str) -> ErrorRecord {
        ErrorRecord { status: "error", command: command.to_string(), kind: self.kind(), exit_code: self.exit_code(), message: self.to_string() }
    }
}

/// Machine-readable failure record written to `error.json` and stderr.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub command: String,
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl From<perfolayer::Error> for CliError {
    fn from(e: perfolayer::Error) -> Self {
        if e.is_solver_failure() {
            CliError::Solver(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
