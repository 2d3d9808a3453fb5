//! Error type shared by all simulator modules.

/// Errors produced by parameter validation, inverse solves and simulations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violates its physical or structural constraints.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An inverse solve has no solution for the requested target.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// The feedback loop did not reach equilibrium in the allotted time.
    #[error("loop not settled after {max_time} s (residual {residual:.3e})")]
    NotSettled { max_time: f64, residual: f64 },

    /// A step-response trajectory could not be fitted.
    #[error("step-response fit failed: {0}")]
    FitFailure(String),

    /// A sample stream does not match the framing implied by its config.
    #[error("sample count {samples} is not divisible by samples_per_bit {samples_per_bit}")]
    LengthMismatch { samples: usize, samples_per_bit: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

pub(crate) fn require_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and ≥ 0, got {value}"),
        ))
    }
}
