use thiserror::Error;

/// Errors raised by the channel model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A lookup fell outside the tabulated range. Tables are never extrapolated.
    #[error("{value} is outside the tabulated range [{min}, {max}]")]
    OutOfDomain { value: f64, min: f64, max: f64 },

    /// The absorption coefficient is zero, so the re-radiation prefactor is 0/0.
    #[error("degenerate medium: k = 0 has no re-radiation; use the lossless limit instead")]
    DegenerateMedium,

    /// Adaptive quadrature ran out of subdivisions.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Convergence { estimate: f64, error_bound: f64 },

    /// β left [0, 1] by more than the quadrature tolerance.
    #[error("re-radiation fraction {value} is outside [0, 1]")]
    BetaOutOfRange { value: f64 },

    /// No likelihood-equality root lies strictly between the two symbols.
    #[error("ML threshold between {p0} and {p1} collapsed (variances {var0:e}, {var1:e})")]
    ThresholdDegeneracy {
        p0: f64,
        p1: f64,
        var0: f64,
        var1: f64,
    },

    /// The amplitude distribution is a point mass (K = ∞).
    #[error("amplitude distribution is degenerate (K = inf)")]
    DegenerateDistribution,

    /// A malformed absorption table.
    #[error("absorption table, {location}: {reason}")]
    Table { location: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
