use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix size must be at least 2, got {0}")]
    InvalidSize(usize),

    #[error("size mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    SizeMismatch { expected: usize, rows: usize, cols: usize },

    #[error("index out of range: l={l}, m={m}")]
    IndexOutOfRange { l: i64, m: i64 },

    #[error("eigensolver failed on band m={band}: {reason}")]
    Eigensolver { band: usize, reason: String },

    #[error("grid {nlat}x{nlon} cannot resolve degree {lmax}")]
    InsufficientResolution { nlat: usize, nlon: usize, lmax: usize },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("matrix exponential overflow (norm {0:e})")]
    Overflow(f64),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("fixed point: constants undefined at the south pole")]
    FixedPoint,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Stable machine-readable identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidSize(_) => "invalid_size",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::Eigensolver { .. } => "eigensolver",
            Error::InsufficientResolution { .. } => "insufficient_resolution",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Overflow(_) => "overflow",
            Error::Degenerate(_) => "degenerate",
            Error::FixedPoint => "fixed_point",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Format(_) => "format",
        }
    }
}
