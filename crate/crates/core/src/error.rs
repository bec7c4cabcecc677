use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("system model needs at least one generator")]
    NoGenerators,

    #[error("droop allocation impossible: every FFR has zero regulation margin")]
    ZeroMargins,

    /// `|ΔP_f + ΔP_r|` fell below the conditioning threshold: the regulation
    /// (nearly) offsets the imbalance and the equivalent inertia is unbounded.
    #[error("equivalent inertia ill-conditioned: |ΔP_f + ΔP_r| = {denominator:e}")]
    IllConditioned { denominator: f64 },

    #[error("unbounded time-variant droop is singular at zero elapsed time")]
    Singular,

    #[error("simulation diverged at sample {sample}")]
    Diverged { sample: usize },

    #[error("trace has no samples at or after the imbalance onset")]
    NoPostOnsetSamples,
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }
}

/// Fails unless `value` is finite and strictly positive.
pub(crate) fn ensure_positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            alloc::format!("must be finite and > 0, got {value}"),
        ))
    }
}

pub(crate) fn ensure_non_negative(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            alloc::format!("must be finite and >= 0, got {value}"),
        ))
    }
}
