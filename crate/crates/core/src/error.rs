use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("sentence has no tokens")]
    EmptySentence,

    #[error("invalid parse for sentence {sent_id}: {reason}")]
    InvalidParse { sent_id: String, reason: String },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("all fragments were filtered out; the answer matrix is empty")]
    EmptyMatrix,

    #[error("column labels of the motif matrix do not match the latent space")]
    Alignment,

    #[error("question has no usable sink motif")]
    Unassignable,

    #[error("need at least {needed} usable embeddings to fit, found {found}")]
    Infeasible { needed: usize, found: usize },

    #[error("model file version {found} is not supported (expected {expected})")]
    IncompatibleVersion { found: u32, expected: u32 },

    #[error("corrupt container: {0}")]
    Corrupt(String),

    #[error("statistic undefined: {0}")]
    Undefined(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("missing artifact {path} (run stage `{stage}` first)")]
    MissingArtifact { stage: &'static str, path: PathBuf },

    #[error("invalid config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
