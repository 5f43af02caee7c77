use thiserror::Error;

/// A configuration value failed validation. `field` is the dotted path of the
/// offending key, e.g. `channel.m_los`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration: {field}: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("reference-distance singularity: link distance is zero")]
    ZeroDistance,
    #[error("ground distance must be non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("closed-form exclusion sets need a drone above the base stations")]
    ClosedFormUnavailable,
    #[error("no signal from a base station at ground distance {0} m (outside the antenna footprint)")]
    NoSignal(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("quadrature did not converge: estimated error {achieved:.3e} exceeds tolerance {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },
    #[error("nakagami parameter m = {0} exceeds the analytic limit of {max}", max = crate::analytic::MAX_ANALYTIC_M)]
    FadingOrderTooLarge(u32),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for this error: 2 for bad input, 3 for numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Manifest(_) => 2,
            Error::Numeric(_) | Error::Model(_) | Error::Io(_) | Error::Csv(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
