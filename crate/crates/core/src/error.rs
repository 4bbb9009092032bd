use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sigma must be strictly positive (field `{field}` = {value})")]
    NonPositiveSigma { field: &'static str, value: f64 },
    #[error("horizon must be strictly positive (field `{field}` = {value})")]
    NonPositiveHorizon { field: &'static str, value: f64 },
    #[error("field `{field}` is not finite ({value})")]
    NonFiniteField { field: &'static str, value: f64 },
    #[error("quadratic characteristic is zero; estimator undefined")]
    DegenerateQ,
    #[error("lambda must be nonzero for this operation")]
    LambdaZero,
    #[error("exact joint sampler needs lambda != 0")]
    LambdaZeroUnsupportedExact,
    #[error("operation requires sigma = 1 (got {0}); rescale first")]
    NotUnitSigma(f64),
    #[error("operation requires y0 = 0 (got {0})")]
    NonzeroInitialValue(f64),
    #[error("operation requires lambda > 0 (got {0})")]
    NonPositiveLambda(f64),
    #[error("transform argument outside convergence region: {0}")]
    OutsideConvergenceRegion(String),
    #[error("quadrature tolerance not met: value {value}, error estimate {error}")]
    ToleranceNotMet { value: f64, error: f64 },
    #[error("contour integral did not settle: {0}")]
    ContourDivergence(String),
    #[error("method not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed input at row {row}, column `{column}`: {message}")]
    MalformedInput {
        row: usize,
        column: String,
        message: String,
    },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
