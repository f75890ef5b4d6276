use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid configuration; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("simulation failed in replicate {replicate}: {source}")]
    Simulation {
        replicate: u64,
        #[source]
        source: tpsim_core::Error,
    },
    #[error("{0}")]
    Core(#[from] tpsim_core::Error),
}

impl CliError {
    pub(crate) fn from_json(e: serde_json::Error) -> Self {
        // serde_json messages already end in "at line L column C".
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Read { .. } => 2,
            _ => 1,
        }
    }
}
