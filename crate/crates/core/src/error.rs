use std::path::PathBuf;

use crate::world::PoiId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed JSON; `field` is the dotted path of the offending value.
    #[error("{file}: parse error at `{field}`: {message}")]
    Parse {
        file: String,
        field: String,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid generation config: {0}")]
    Config(String),

    #[error("unknown POI id {0}")]
    UnknownPoi(PoiId),

    #[error("lookup failed: {0}")]
    Lookup(String),

    #[error("invalid query: {0}")]
    Query(String),

    #[error("invalid itinerary: {0}")]
    Itinerary(String),

    #[error("template `{template}`: {message}")]
    Generation { template: String, message: String },

    #[error("question `{question}`: {source}")]
    Annotation {
        question: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn from_path_error(file: impl Into<String>, err: serde_path_to_error::Error<serde_json::Error>) -> Self {
        let field = err.path().to_string();
        Error::Parse {
            file: file.into(),
            field,
            message: err.into_inner().to_string(),
        }
    }
}
