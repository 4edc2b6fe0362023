//! Error types for configuration, simulation, and file handling.

use thiserror::Error;

/// Anything that can stop a scenario from producing a result.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration. Carries every violation found, not just the first.
    #[error("configuration invalid:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    /// Config file could not be parsed at all.
    #[error("config parse error: {0}")]
    ConfigParse(String),

    /// A state or derivative component became non-finite during integration.
    #[error("integration fault at t = {t:.6} s: non-finite value in {what}")]
    Fault { t: f64, what: String },

    #[error("telemetry error: {0}")]
    Telemetry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msgs: Vec<String>) -> Self {
        Error::Config(msgs)
    }

    /// Process exit code contract: 3 for config problems, 2 for every fault
    /// hit while running (integration, telemetry files, I/O). Exit code 1 is
    /// reserved for acceptance failure and never produced through `Error`.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::ConfigParse(_) => 3,
            Error::Fault { .. } | Error::Telemetry(_) | Error::Io(_) => 2,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Telemetry(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
