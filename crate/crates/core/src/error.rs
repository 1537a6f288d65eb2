use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("window too short: {frames} frame(s), need at least {min}")]
    WindowTooShort { frames: usize, min: usize },

    #[error("unobservable fit: {0}")]
    Unobservable(String),

    #[error("undefined measurement: {0}")]
    Undefined(String),

    #[error("degenerate motion: {0}")]
    Degenerate(String),

    #[error("missing calibration: {0}")]
    MissingCalibration(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: alloc::boxed::Box::new(self),
        }
    }

    /// Innermost error, skipping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}
