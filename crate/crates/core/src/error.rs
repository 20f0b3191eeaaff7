use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A document could not be decoded. Carries line/field context where known.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// Audio container or codec the engine does not handle.
    #[error("unsupported audio format: {0}")]
    Format(String),

    #[error("measurement error: {0}")]
    Measurement(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by the caller's input or configuration rather
    /// than by the environment or the audio content.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Config(_) | Error::Parse(_) | Error::Validation(_)
        )
    }

    /// Prefixes the message with additional context, keeping the variant.
    pub fn context(self, what: impl std::fmt::Display) -> Self {
        match self {
            Error::Domain(m) => Error::Domain(format!("{what}: {m}")),
            Error::Config(m) => Error::Config(format!("{what}: {m}")),
            Error::Parse(m) => Error::Parse(format!("{what}: {m}")),
            Error::Validation(m) => Error::Validation(format!("{what}: {m}")),
            Error::Format(m) => Error::Format(format!("{what}: {m}")),
            Error::Measurement(m) => Error::Measurement(format!("{what}: {m}")),
            Error::Precondition(m) => Error::Precondition(format!("{what}: {m}")),
            Error::Io { context, source } => Error::Io {
                context: format!("{what}: {context}"),
                source,
            },
        }
    }
}
