use thiserror::Error;

/// Errors produced by the receiver toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its valid domain.
    #[error("invalid `{name}`: {reason}")]
    Domain { name: &'static str, reason: String },

    /// The no-click denominator lost positivity. Unreachable for valid inputs.
    #[error("no-click radicand is {0}, expected a positive value")]
    Numeric(f64),

    /// `4ξ(1−ξ)e^(−N₀)` is too close to one for the parity statistics.
    #[error("degenerate binary problem: 4ξ(1−ξ)e^(−N₀) = {0}")]
    DegenerateProblem(f64),

    /// The measurement setting cannot be used in this context.
    #[error("measurement setting not supported here: {0}")]
    UnsupportedSetting(String),

    /// A strategy table has no entry for a reachable prefix.
    #[error("strategy has no setting for click prefix {0}")]
    UndefinedPrefix(String),

    /// Every hypothesis gives zero probability to what was observed.
    #[error("all hypotheses assign zero probability to the observed outcome")]
    ZeroLikelihood,

    /// Outcome enumeration would exceed the configured cap.
    #[error("exact enumeration needs {observations} observations, cap is {cap}")]
    CapExceeded { observations: usize, cap: usize },

    /// The objective returned NaN or an infinity.
    #[error("objective is not finite ({value}) at {at:?}")]
    NonFiniteObjective { at: Vec<f64>, value: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        name,
        reason: reason.into(),
    }
}
