use thiserror::Error;

use crate::eval::EvalError;
use crate::kb::KbError;
use crate::policy::PolicyError;
use crate::store::StoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error returned by the pipeline entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("message `{0}` not found")]
    MessageNotFound(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed json in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}
