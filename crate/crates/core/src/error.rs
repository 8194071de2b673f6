use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A single offending configuration field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid configuration: {}", join_fields(.0))]
    Invalid(Vec<FieldError>),

    #[error(
        "{sensors} sensors and {subchannels} subchannels give {maps} assignment maps \
         (limit {limit}); reduce the number of subchannels"
    )]
    TooComplex {
        sensors: usize,
        subchannels: usize,
        maps: f64,
        limit: u64,
    },

    #[error("episode V={v} seed={seed}: {source}")]
    Episode {
        v: f64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Stable, machine-readable category used by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Invalid(_) => "validation",
            Error::TooComplex { .. } => "complexity",
            Error::Episode { source, .. } => source.category(),
            Error::Csv { .. } => "output",
        }
    }

    /// Process exit code associated with [`Error::category`].
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "parse" | "validation" | "complexity" => 3,
            "io" => 4,
            _ => 5,
        }
    }
}

fn join_fields(fields: &[FieldError]) -> String {
    fields
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
