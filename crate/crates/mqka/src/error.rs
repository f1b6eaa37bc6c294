use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data: length mismatches, empty lists, out-of-range positions.
    #[error("structural error: {0}")]
    Structural(String),

    /// An operation was attempted by a party that is not entitled to perform it
    /// (encoding without holding the sequence, measuring without the state
    /// descriptor, verifying decoys before their positions were revealed).
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    /// The colluder placement cannot control the key.
    #[error("infeasible colluder placement: {0}")]
    Feasibility(String),

    /// A decoy check failed and the protocol run was aborted.
    #[error("detection abort in period {period} on edge {from}->{to}: {failed} decoy(s) failed")]
    DetectionAbort {
        period: usize,
        from: usize,
        to: usize,
        failed: usize,
    },

    /// Bad CLI flags or config file contents.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub fn violation(msg: impl Into<String>) -> Self {
        Error::ProtocolViolation(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for the CLI: 0 success, 2 detection abort,
    /// 3 feasibility error, 4 config error, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DetectionAbort { .. } => 2,
            Error::Feasibility(_) => 3,
            Error::Config(_) => 4,
            _ => 1,
        }
    }
}
