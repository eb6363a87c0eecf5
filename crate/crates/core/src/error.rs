use thiserror::Error;

/// Everything the numerical engine can refuse or fail at.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("root not found: {0}")]
    RootNotFound(String),
    #[error("degenerate expansion: {0}")]
    DegenerateExpansion(String),
    #[error("undefined saturation: {0}")]
    UndefinedSaturation(String),
    #[error("non-saturating nonlinearity: {0}")]
    NonSaturating(String),
    #[error("divergence at step {step}: {detail}")]
    Divergence { step: usize, detail: String },
    #[error("statistics error: {0}")]
    Statistics(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("norm drift {drift:e} exceeds tolerance at t = {t}")]
    NormDrift { drift: f64, t: f64 },
    #[error("window leak: |c_{m}| = {value:e} at t = {t}")]
    WindowLeak { m: i64, value: f64, t: f64 },
}

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
