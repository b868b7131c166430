use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("altitude must be non-negative, got {0} m")]
    NegativeAltitude(f64),
    #[error("temperature must be positive, got {0} K")]
    NonPositiveTemperature(f64),
    #[error("speed must be positive, got {0} m/s")]
    NonPositiveSpeed(f64),
    #[error("non-finite state derivative")]
    NonFinite,
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("terminal guidance requires an acquired seeker measurement")]
    NotAcquired,
    #[error("impact refinement needs y_before > 0 >= y_after, got {before} and {after}")]
    BadImpactBracket { before: f64, after: f64 },
    #[error("statistics requested over an empty sample")]
    EmptySample,
    #[error("none of the {0} runs reached impact")]
    NoImpacts(usize),
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> SimError {
    SimError::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
