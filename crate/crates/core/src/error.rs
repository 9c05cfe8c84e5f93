use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape error: expected dimension {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("near-singular resolvent at lambda = {lambda}: dist(lambda, spectrum) ~ {dist:e}")]
    NearSingular { lambda: Complex64, dist: f64 },
    #[error("contour error: {0}")]
    Contour(String),
    #[error("symbol singular at grid node {index} (xi = {xi})")]
    Singularity { index: usize, xi: f64 },
    #[error("window too small: {0}")]
    Window(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not injective: {0}")]
    NotInjective(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
