use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} is outside the validated domain |x| <= {limit}")]
    Domain { value: f64, limit: f64 },

    #[error("truncation cap {max_order} reached with residual tail weight {residual:e}")]
    TruncationCap { max_order: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate bin index {0}")]
    DuplicateBin(i64),

    #[error("widened window [{min}, {max}] exceeds the absolute bin bound {bound}")]
    WindowBound { min: i64, max: i64, bound: i64 },

    #[error("quadrature needs at least {min} points, got {got}")]
    TooFewPoints { got: usize, min: usize },

    #[error("no interior maximum in [{lo}, {hi}]")]
    NoInteriorMaximum { lo: f64, hi: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("peak window {peak:?} overlaps background window {background:?}")]
    OverlappingWindows { peak: (f64, f64), background: (f64, f64) },

    #[error("window {window:?} lies outside the histogram span {span:?}")]
    WindowOutsideSpan { window: (f64, f64), span: (f64, f64) },

    #[error("non-positive net denominator for setting pair {label}: {value}")]
    NonPositiveDenominator { label: String, value: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
