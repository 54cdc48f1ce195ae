use thiserror::Error;

/// Everything that stops a run before it produces a report. All of these map
/// to exit status 2; invariant failures are reported, not raised.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}:{line}:{column}: {reason}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        reason: String,
    },

    #[error("field `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("unknown scenario {0:?}; try `prolim list`")]
    UnknownScenario(String),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}
