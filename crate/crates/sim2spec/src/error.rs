use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] sim2spec_core::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status: 3 for inputs the analysis cannot resolve, 2 for
    /// everything else.
    pub fn exit_code(&self) -> i32 {
        use sim2spec_core::Error as E;
        match self {
            Error::Core(e) => match e.root() {
                E::Degenerate(_) | E::Undefined(_) | E::Unobservable(_) | E::WindowTooShort { .. } => EXIT_DEGENERATE,
                _ => EXIT_INPUT,
            },
            _ => EXIT_INPUT,
        }
    }
}
