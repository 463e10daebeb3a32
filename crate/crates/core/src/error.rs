use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    /// A schema violation inside a tabular input file.
    #[error("{}: row {row}, column `{column}`: {message}", file.display())]
    Schema {
        file: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "coordinate descent did not converge after {sweeps} sweeps \
         (max coefficient change {max_change:e}, duality gap {duality_gap:e})"
    )]
    NotConverged {
        sweeps: usize,
        max_change: f64,
        duality_gap: f64,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a label (stage name, hour, alpha, file).
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Name of the first `stage <name>` context in the chain.
    pub fn stage(&self) -> Option<&str> {
        match self {
            Error::Context { context, source } => context.strip_prefix("stage ").or_else(|| source.stage()),
            _ => None,
        }
    }

    /// Process exit code: 2 for validation-type failures, 3 for numerical ones.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Numerical(_) | Error::NotConverged { .. } => 3,
            _ => 2,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::Validation(_) => "validation",
            Error::Schema { .. } => "schema",
            Error::Numerical(_) => "numerical",
            Error::NotConverged { .. } => "not_converged",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Context { .. } => unreachable!(),
        }
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Validation(msg()))
    }
}
