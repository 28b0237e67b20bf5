use thiserror::Error;

/// Errors raised by the discretization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("solver failure: relative residual {residual:.3e} above tolerance {tol:.3e}")]
    SolverFailure { residual: f64, tol: f64 },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Short class name used for CLI exit messages.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Config(_) => "ConfigError",
            Error::Domain(_) => "DomainError",
            Error::Geometry(_) => "GeometryError",
            Error::SolverFailure { .. } => "SolverFailure",
            Error::Internal(_) => "InternalError",
            Error::Io(_) => "IoError",
            Error::Context { source, .. } => source.class(),
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
