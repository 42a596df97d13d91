use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time {t} is below the kernel singularity guard {t_min}")]
    NearSingularTime { t: f64, t_min: f64 },

    #[error("focal singularity: |sin(omega t)| = {sin_wt:e} at t = {t}")]
    FocalSingularity { t: f64, sin_wt: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("split-step norm drift {drift:e} exceeds {limit:e}; retry with {suggested_steps} steps")]
    StepCountTooSmall {
        drift: f64,
        limit: f64,
        suggested_steps: usize,
    },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
