use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "infeasible {kind} share: need {requested} cells but only {available} are eligible (deficit {deficit})"
    )]
    InfeasibleShare {
        kind: &'static str,
        requested: usize,
        available: usize,
        deficit: usize,
    },

    #[error("income undefined: labor input is zero")]
    IncomeUndefined,

    #[error("underdetermined fit for `{field}`: {bins} bins, need at least 3")]
    Underdetermined { field: String, bins: usize },

    #[error("calibration failed: all {0} evaluated points were poisoned")]
    CalibrationFailed(usize),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
