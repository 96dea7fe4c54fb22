use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the laboratory.
///
/// The CLI maps these onto exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown nonlinearity family `{0}` (known: {1})")]
    UnknownFamily(String, String),

    #[error("family `{family}`: {constraint}")]
    InvalidParams { family: String, constraint: String },

    #[error("{what}: argument {value} outside the certified domain ({detail})")]
    Domain {
        what: &'static str,
        value: f64,
        detail: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("frame at s = {s:.3} is under-resolved: {nodes} nodes in y <= 1 (need 8); {hint}")]
    UnderResolved { s: f64, nodes: usize, hint: String },

    #[error("time step underflow at t = {t:e} (dt = {dt:e}): blow-up resolution exhausted")]
    ResolutionExhausted { t: f64, dt: f64 },

    #[error("instability at step {step} (t = {t:e}): {detail}")]
    Instability { step: u64, t: f64, detail: String },

    #[error("root bracketing failed for {what} at target {target:e}")]
    Bracket { what: &'static str, target: f64 },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// 2 for usage/config problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownFamily(..)
            | Error::InvalidParams { .. }
            | Error::Invalid(_)
            | Error::Config { .. }
            | Error::Io { .. }
            | Error::Json(_) => 2,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
