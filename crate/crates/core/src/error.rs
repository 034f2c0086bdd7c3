use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("no connected Erdos-Renyi sample (n={n}, p={p}) after {attempts} attempts")]
    NotConnected { n: usize, p: f64, attempts: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{}line {line}: {msg}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        msg: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant `{invariant}` violated: {detail}")]
    Invariant {
        invariant: &'static str,
        detail: String,
    },

    #[error("data stream exhausted: agent {agent} has no sample for round {round}")]
    StreamExhausted { agent: usize, round: usize },

    #[error("round {round}: {source}")]
    AtRound {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Invariant,
    Io,
}

impl Error {
    pub(crate) fn at_round(self, round: usize) -> Error {
        match self {
            e @ Error::AtRound { .. } => e,
            e => Error::AtRound {
                round,
                source: Box::new(e),
            },
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            // anything that fails mid-run is a broken runtime guarantee
            Error::AtRound { source, .. } if source.class() == ErrorClass::Io => ErrorClass::Io,
            Error::AtRound { .. } => ErrorClass::Invariant,
            Error::Precondition(_) | Error::Invariant { .. } | Error::StreamExhausted { .. } => {
                ErrorClass::Invariant
            }
            Error::Io { .. } => ErrorClass::Io,
            _ => ErrorClass::Config,
        }
    }
}
