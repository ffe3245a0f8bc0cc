use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error in {func}: {reason}")]
    Domain { func: &'static str, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("matrix is not positive definite (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("wait cap of {cap:e} samples exceeded")]
    WaitCapExceeded { cap: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no admissible real root: {0}")]
    NoRoot(String),

    #[error("{failures} of {trials} trials failed, above the 10% limit")]
    FailureRate { failures: u64, trials: u64 },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(func: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            func,
            reason: reason.into(),
        }
    }

    /// True for per-trial failures that a sweep counts instead of aborting on.
    pub fn is_trial_failure(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::WaitCapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
