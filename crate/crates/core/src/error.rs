use thiserror::Error;

/// Errors returned by the forecasting models and operators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The input series had no observations.
    #[error("series is empty")]
    EmptySeries,

    /// An observation was NaN or infinite.
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    /// Label vector and value vector disagree in length.
    #[error("{labels} labels supplied for {values} values")]
    LabelLengthMismatch { values: usize, labels: usize },

    /// Two sequences that must be aligned have different lengths.
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// Not enough observations to run the requested operation.
    #[error("insufficient data: need at least {required} observations, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    /// A grey model was asked to fit a value that is zero or negative.
    #[error("grey models require strictly positive values; index {index} is {value}")]
    NonPositive { index: usize, value: f64 },

    /// A divisor in a ratio series vanished.
    #[error("division by zero at index {index}")]
    ZeroDenominator { index: usize },

    /// Normal equations had no unique solution.
    #[error("singular normal equations: {0}")]
    Singular(&'static str),

    /// Forecast horizon must be at least one step.
    #[error("horizon must be at least 1")]
    InvalidHorizon,

    /// A recursive simulation left the range of finite floats.
    #[error("numeric overflow at step {step}")]
    Overflow { step: usize },

    /// The data make a statistic undefined.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A parameter was outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Network input width did not match the first layer.
    #[error("shape mismatch: expected {expected} inputs, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch} (loss is not finite); try a smaller learning rate")]
    Divergence { epoch: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
