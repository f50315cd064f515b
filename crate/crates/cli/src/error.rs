use narratables::algebra::AlgebraError;
use narratables::geometry::GeometryError;
use narratables::narrative::NarrativeError;
use narratables::quantum::QuantumError;
use thiserror::Error;

/// Exit code for command-line misuse.
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_PARSE: i32 = 65;
pub const EXIT_IO: i32 = 66;
pub const EXIT_UNKNOWN_RULE: i32 = 67;
pub const EXIT_INDEX: i32 = 68;
pub const EXIT_GEOMETRY: i32 = 69;
pub const EXIT_QUANTUM: i32 = 70;
pub const EXIT_NARRATIVE: i32 = 71;
pub const EXIT_ALGEBRA: i32 = 72;

/// cluster-check outcomes.
pub const EXIT_CLUSTER_VIOLATION: i32 = 2;
pub const EXIT_NON_CONSERVING: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown rule {name:?}; available: {available}")]
    UnknownRule { name: String, available: String },
    #[error("{what} index {index} out of range (0..{len})")]
    IndexOutOfRange { what: &'static str, index: usize, len: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Narrative(NarrativeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl From<NarrativeError> for CliError {
    fn from(e: NarrativeError) -> Self {
        match e {
            NarrativeError::Geometry(g) => CliError::Geometry(g),
            NarrativeError::Quantum(q) => CliError::Quantum(q),
            other => CliError::Narrative(other),
        }
    }
}

impl CliError {
    pub fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse { .. } => EXIT_PARSE,
            CliError::Io { .. } => EXIT_IO,
            CliError::UnknownRule { .. } => EXIT_UNKNOWN_RULE,
            CliError::IndexOutOfRange { .. } => EXIT_INDEX,
            CliError::Geometry(_) => EXIT_GEOMETRY,
            CliError::Quantum(_) => EXIT_QUANTUM,
            CliError::Narrative(_) => EXIT_NARRATIVE,
            CliError::Algebra(_) => EXIT_ALGEBRA,
        }
    }
}
