use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index {index} out of range (bound {bound})")]
    Index { index: usize, bound: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("singular system in {context} (condition estimate {condition:.3e})")]
    Singular { context: String, condition: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("pilot matrix is not orthogonal (max deviation {deviation:.3e})")]
    Pilot { deviation: f64 },

    #[error("infeasible draw: {0}")]
    Infeasible(String),

    #[error("resource limit: {what} needs {requested} elements, cap is {cap}")]
    Resource {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("every dictionary atom has already been selected")]
    Exhausted,

    #[error("reference channel has zero norm")]
    UndefinedReference,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    /// Prefixes the context of a singular-system error, leaving other variants untouched.
    pub fn in_context(self, outer: impl std::fmt::Display) -> Self {
        match self {
            Error::Singular { context, condition } => Error::Singular {
                context: format!("{outer}: {context}"),
                condition,
            },
            other => other,
        }
    }

    /// True for errors that come from the configuration rather than the computation.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Format { .. })
    }
}

impl Clone for Error {
    fn clone(&self) -> Self {
        match self {
            Error::Dimension(s) => Error::Dimension(s.clone()),
            Error::Index { index, bound } => Error::Index {
                index: *index,
                bound: *bound,
            },
            Error::NotHermitian { deviation } => Error::NotHermitian {
                deviation: *deviation,
            },
            Error::Singular { context, condition } => Error::Singular {
                context: context.clone(),
                condition: *condition,
            },
            Error::Config(s) => Error::Config(s.clone()),
            Error::Pilot { deviation } => Error::Pilot {
                deviation: *deviation,
            },
            Error::Infeasible(s) => Error::Infeasible(s.clone()),
            Error::Resource {
                what,
                requested,
                cap,
            } => Error::Resource {
                what,
                requested: *requested,
                cap: *cap,
            },
            Error::Exhausted => Error::Exhausted,
            Error::UndefinedReference => Error::UndefinedReference,
            // io::Error is not Clone; keep its kind and message
            Error::Io { path, source } => Error::Io {
                path: path.clone(),
                source: std::io::Error::new(source.kind(), source.to_string()),
            },
            Error::Format { path, message } => Error::Format {
                path: path.clone(),
                message: message.clone(),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
