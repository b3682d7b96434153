use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("probability {name} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { name: String, value: f64 },

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("set containment violated: {0}")]
    Containment(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "exact engine refuses a {nodes}-node network (cap {cap}); estimated ~{estimated_ops:.3e} \
         one-hop evaluations. Use `simulate` (Monte Carlo) or raise the cap with --cap-override"
    )]
    ExactCapExceeded {
        nodes: usize,
        cap: usize,
        estimated_ops: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid score rule: {0}")]
    InvalidRule(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn check_prob(name: impl FnOnce() -> String, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange {
            name: name(),
            value,
        })
    }
}
