use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no guided mode: largest eigenvalue gives n_eff = {n_eff:.6} <= n_clad = {n_clad:.6}")]
    NoGuidedMode { n_eff: f64, n_clad: f64 },
    #[error("grid window too small: boundary amplitude is {ratio:.3e} of the peak (limit 1e-3)")]
    GridTooSmall { ratio: f64 },
    #[error("eigen solver did not converge after {iterations} iterations")]
    EigenNotConverged { iterations: usize },
    #[error("field has zero power")]
    ZeroField,
    #[error("field grids or wavelengths do not match")]
    GridMismatch,
    #[error("negative propagation distance {0} um")]
    NegativeDistance(f64),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("invalid refractive index {0} (must be >= 1)")]
    InvalidIndex(f64),
    #[error("invalid gap configuration: {0}")]
    InvalidGapConfig(String),
    #[error("series not converged: term weight {weight:.3e} above tolerance after {terms} terms")]
    SeriesNotConverged { terms: usize, weight: f64 },
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("value {value} out of range {range}")]
    OutOfRange { value: f64, range: &'static str },
    #[error("invalid cavity specification: {0}")]
    InvalidCavity(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("fit did not converge within {iterations} iterations")]
    FitDiverged { iterations: usize },
    #[error("fit Jacobian is rank deficient")]
    RankDeficient,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
