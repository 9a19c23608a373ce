use thiserror::Error;

/// Errors raised by the sampler library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmcmcError {
    /// Invalid configuration value; the message names the offending field.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller broke a documented precondition (shape mismatch, short window, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The model plug-in rejected an observation.
    #[error("step {step}: observation rejected: {message}")]
    Observation { step: usize, message: String },

    /// Every particle weight underflowed to zero.
    #[error("step {step}: all particle weights are zero")]
    DegenerateWeights { step: usize },

    /// A supplied convergence certificate does not satisfy its own conditions.
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
}

pub type Result<T> = std::result::Result<T, SmcmcError>;
