use thiserror::Error;

/// Errors raised by the quadrature, worst-case error and bound routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("working precision of {digits} digits is below the minimum of {min} digits")]
    PrecisionTooLow { digits: u32, min: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("tridiagonal eigenvalue iteration did not converge for n = {n} within {sweeps} sweeps")]
    NoConvergence { n: usize, sweeps: usize },

    #[error(
        "precision exhausted: {quantity} = {value} is negative beyond the clamp threshold 1e-{threshold_digits}; raise --digits"
    )]
    PrecisionExhausted {
        quantity: &'static str,
        value: String,
        threshold_digits: u32,
    },

    #[error(
        "Cholesky breakdown at row {row} (pivot {pivot}) with {digits} digits; roughly {digits_needed} digits are needed, or thin the point set"
    )]
    CholeskyBreakdown {
        row: usize,
        pivot: String,
        digits: u32,
        digits_needed: u32,
    },

    #[error("linear solve residual {residual} exceeds 1e-{threshold_digits}; raise --digits")]
    ResidualTooLarge {
        residual: String,
        threshold_digits: u32,
    },

    #[error("basis expansion tail did not converge up to order {order} (tail bound {tail_bound})")]
    TailNotConverged { order: usize, tail_bound: String },

    #[error("k = {k} is below the validity threshold {threshold}")]
    BelowValidityThreshold { k: usize, threshold: String },

    #[error("malformed point count {n} for dimension {dim}: {reason}")]
    MalformedPointCount { n: u64, dim: usize, reason: String },

    #[error("rate fit: {0}")]
    RateFit(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures that are cured by raising the working precision.
    pub fn is_precision_exhaustion(&self) -> bool {
        if let Error::Context { source, .. } = self {
            return source.is_precision_exhaustion();
        }
        matches!(
            self,
            Error::PrecisionExhausted { .. }
                | Error::CholeskyBreakdown { .. }
                | Error::ResidualTooLarge { .. }
                | Error::NoConvergence { .. }
        )
    }

    /// Wraps the error with the row or parameter it occurred at.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
