use thiserror::Error;

/// Process exit status for a successful run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("unknown key `{key}` (nearest valid key: `{nearest}`)")]
    UnknownKey { key: String, nearest: &'static str },
    #[error(transparent)]
    Model(#[from] qthermo_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Model(e) if e.is_solver_failure() => EXIT_SOLVER,
            _ => EXIT_VALIDATION,
        }
    }
}
