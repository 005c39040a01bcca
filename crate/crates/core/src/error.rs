use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degree overflow: {k} + {l} exceeds dimension {n}")]
    DegreeOverflow { k: usize, l: usize, n: usize },
    #[error("interior product of a degree-0 form")]
    DegreeZero,
    #[error("3-form is not positive (det B = {0:e})")]
    NonPositiveForm(f64),
    #[error("metric drift {drift:e} exceeds tolerance {tol:e}")]
    MetricDrift { drift: f64, tol: f64 },
    #[error("time step {dt:e} exceeds stability bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("constraint repair {repair:e} exceeds tolerance {tol:e}")]
    ConstraintBlowup { repair: f64, tol: f64 },
    #[error("non-finite value after step at t = {0}")]
    NonFinite(f64),
    #[error("structure constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("series has {0} samples, need at least 3")]
    TooShortSeries(usize),
    #[error("empty series")]
    EmptySeries,
    #[error("grids differ")]
    MismatchedGrids,
    #[error("evaluation time {t} is not before the horizon {horizon}")]
    HorizonPassed { t: f64, horizon: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
