use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular or ill-conditioned (condition estimate {0:.3e})")]
    SingularMatrix(f64),

    #[error("eigenvalues are too close to separate")]
    DegenerateEigenvalues,

    #[error("conditioning gate failed: {0}")]
    Conditioning(&'static str),

    #[error("unknown constellation `{0}` (expected BPSK, QPSK, PSK16 or QAM16)")]
    UnknownConstellation(String),

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("{bits} bits cannot be split into {per_symbol}-bit symbols")]
    BitCount { bits: usize, per_symbol: usize },

    #[error("scheme {scheme} requires a PSK constellation, got {constellation}")]
    PskRequired { scheme: String, constellation: String },

    #[error("gave up after {0} channel redraws")]
    ResampleExhausted(u32),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Errors that a fresh channel draw can cure.
    pub fn is_conditioning(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix(_) | Error::DegenerateEigenvalues | Error::Conditioning(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
