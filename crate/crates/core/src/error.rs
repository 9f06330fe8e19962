use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("state not on wave curve: {0}")]
    NotOnCurve(String),

    #[error("end state outside the rarefaction/shock region: {0}")]
    Membership(String),

    #[error("zero-amplitude shock (Lax limit speed {lax_limit})")]
    Degenerate { lax_limit: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("eigenstructure error: {0}")]
    Eigen(String),

    #[error("shock profile connection failed (delta_S = {delta_s}): {reason}")]
    Connection { delta_s: f64, reason: String },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("simulation aborted at t = {t}: {reason}")]
    Abort { t: f64, reason: String },

    #[error("config error for key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

impl WaveError {
    pub fn domain(msg: impl Into<String>) -> Self {
        WaveError::Domain(msg.into())
    }

    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        WaveError::Config { key: key.into(), reason: reason.into() }
    }

    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(self, WaveError::Config { .. } | WaveError::Membership(_) | WaveError::Argument(_))
    }
}

impl From<std::io::Error> for WaveError {
    fn from(e: std::io::Error) -> Self {
        WaveError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, WaveError>;
