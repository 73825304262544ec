use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero vector has no projective class")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid randomization: {0}")]
    InvalidRandomization(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("selected outcome has norm {norm:e}; the state has no image")]
    KernelHit { norm: f64 },
    #[error("channel is not irreducible")]
    NotIrreducible,
    #[error("state lies outside the support of the density matrix (residual {residual:e})")]
    OutsideSupport { residual: f64 },
    #[error("pushforward density is singular at a grid node (det {det:e})")]
    SingularPushforward { det: f64 },
    #[error("fixed-point iteration did not converge: residual {residual:e} after {iters} sweeps")]
    NoConvergence { residual: f64, iters: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("{0}")]
    Parse(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroVector => "ZeroVector",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotUnitary { .. } => "NotUnitary",
            Error::InvalidChannel(_) => "InvalidChannel",
            Error::InvalidRandomization(_) => "InvalidRandomization",
            Error::InvalidDensity(_) => "InvalidDensity",
            Error::KernelHit { .. } => "KernelHit",
            Error::NotIrreducible => "NotIrreducible",
            Error::OutsideSupport { .. } => "OutsideSupport",
            Error::SingularPushforward { .. } => "SingularPushforward",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::Empty(_) => "Empty",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
