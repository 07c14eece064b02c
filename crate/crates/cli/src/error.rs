use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("fit did not converge: {0}")]
    NonConvergence(String),
}

impl CliError {
    /// Process exit code: 2 config/usage, 3 I/O, 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::NonConvergence(_) => 4,
        }
    }
}

impl From<rbdrift::Error> for CliError {
    fn from(e: rbdrift::Error) -> Self {
        use rbdrift::Error as E;
        match e {
            E::Io(_) | E::Csv(_) | E::Dataset(_) => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
