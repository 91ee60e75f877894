use std::fmt;

use hfcast_core::pipeline::{IngestError, PipelineError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_INGEST: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Ingest(String),
    Compute(String),
    /// Some runs of a matrix failed; their outputs were still written.
    Partial {
        failed: usize,
        total: usize,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Ingest(_) => EXIT_INGEST,
            CliError::Compute(_) => EXIT_COMPUTE,
            CliError::Partial { .. } => EXIT_PARTIAL,
        }
    }

    pub fn compute(e: impl fmt::Display) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Ingest(m) => write!(f, "input: {m}"),
            CliError::Compute(m) => f.write_str(m),
            CliError::Partial { failed, total } => write!(f, "{failed} of {total} runs failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Ingest(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Ingest(e) => e.into(),
            PipelineError::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::Compute(other.to_string()),
        }
    }
}
