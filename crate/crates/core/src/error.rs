use thiserror::Error;

/// Errors raised by the rate solver, the coefficient models and the simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coefficient is not strictly positive at r = {r}")]
    NonPositiveCoefficient { r: f64 },

    #[error("adaptive quadrature on [{a}, {b}] stopped at estimated error {error:e} after {intervals} intervals")]
    QuadratureFailure {
        a: f64,
        b: f64,
        error: f64,
        intervals: usize,
    },

    #[error("value {value} is outside the attainable range (supremum {supremum})")]
    OutOfRange { value: f64, supremum: f64 },

    #[error("evaluation at r = {r} is below the origin floor {floor}")]
    SingularOrigin { r: f64, floor: f64 },

    #[error("argument {t} is outside the domain of {what}")]
    DomainError { what: String, t: f64 },

    #[error("transform is not increasing near x = {x}")]
    NonMonotoneTransform { x: f64 },

    #[error("rate integrand denominator is not positive at r = {r}")]
    NonPositiveDenominator { r: f64 },

    #[error("rate integral converges to {limit} which is below the requested time {requested}")]
    FiniteTotalIntegral { limit: f64, requested: f64 },

    #[error("rate table queried at t = {t}, outside its domain [{min}, {max}]")]
    ExtrapolationError { t: f64, min: f64, max: f64 },

    #[error("path {path} produced a non-finite state at step {step}")]
    NonFiniteState { path: usize, step: usize },

    #[error("drift order violated at r = {r}: dominating {high} < dominated {low}")]
    DriftOrderViolated { r: f64, high: f64, low: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Stable variant name, used on the CLI diagnostic stream and by the C ABI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonPositiveCoefficient { .. } => "NonPositiveCoefficient",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::SingularOrigin { .. } => "SingularOrigin",
            Error::DomainError { .. } => "DomainError",
            Error::NonMonotoneTransform { .. } => "NonMonotoneTransform",
            Error::NonPositiveDenominator { .. } => "NonPositiveDenominator",
            Error::FiniteTotalIntegral { .. } => "FiniteTotalIntegral",
            Error::ExtrapolationError { .. } => "ExtrapolationError",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::DriftOrderViolated { .. } => "DriftOrderViolated",
            Error::InvalidParameter(_) => "InvalidParameter",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
