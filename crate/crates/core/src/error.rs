use thiserror::Error;

/// Errors raised by the geometry, filtration and stability layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis mismatch: expected `{expected}`, found `{found}`")]
    BasisMismatch { expected: String, found: String },

    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },

    #[error("class is not big")]
    NotBig,

    #[error("class is not pseudoeffective: {0}")]
    NotPseudoeffective(String),

    #[error("Gram matrix of support {0:?} is not negative definite (incomplete curve list?)")]
    NotNegativeDefinite(Vec<usize>),

    #[error("the trivial valuation has no pseudoeffective threshold")]
    TrivialValuation,

    #[error("valuation `{0}` is not supported by this backend")]
    UnsupportedValuation(String),

    #[error("unknown valuation `{0}`")]
    UnknownValuation(String),

    #[error("valuations realized on different models: {0}")]
    IncompatibleModels(String),

    #[error("polytope is unbounded")]
    Unbounded,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid divisorial measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not reach tolerance {tolerance:e} on [{lo}, {hi}]")]
    Quadrature { tolerance: f64, lo: f64, hi: f64 },

    #[error("optimizer did not converge: {0}")]
    Convergence(String),
}

/// Coarse classification used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Geometry,
    Convergence,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Quadrature { .. } | Error::Convergence(_) => ErrorKind::Convergence,
            Error::InvalidModel(_)
            | Error::InvalidMeasure(_)
            | Error::InvalidFiltration(_)
            | Error::InvalidArgument(_)
            | Error::UnknownValuation(_)
            | Error::RankMismatch { .. }
            | Error::BasisMismatch { .. } => ErrorKind::Input,
            _ => ErrorKind::Geometry,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
