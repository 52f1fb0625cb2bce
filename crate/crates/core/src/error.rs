use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A record in an input file could not be decoded.
    #[error("{}: malformed record {record}: {message}", path.display())]
    Parse {
        path: PathBuf,
        record: String,
        message: String,
    },

    /// Slots referenced by the data but missing from the ontology.
    #[error("slots not in ontology: {}", slots.join(", "))]
    UnknownSlots { slots: Vec<String> },

    #[error("invalid corpus: {}", problems.join("; "))]
    Invalid { problems: Vec<String> },

    /// A lexical resource is unusable (empty, contradictory).
    #[error("lexical resource: {0}")]
    Resource(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("hypothesis file is missing turns: {}", format_turns(missing))]
    MissingTurns { missing: Vec<(String, usize)> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        record: impl Into<String>,
        message: impl ToString,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            record: record.into(),
            message: message.to_string(),
        }
    }

    /// True for failures of the environment (missing or unwritable files)
    /// rather than of the data itself.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

fn format_turns(turns: &[(String, usize)]) -> String {
    turns
        .iter()
        .map(|(d, t)| format!("({d}, {t})"))
        .collect::<Vec<_>>()
        .join(", ")
}
