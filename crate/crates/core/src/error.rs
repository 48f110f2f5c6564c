use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("both boundary polynomials are identically zero")]
    BothZero,
    #[error("boundary polynomials share a common factor of degree {0}")]
    NotCoprime(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite state while integrating at x = {x} (lambda = {lambda})")]
    NonFiniteState { x: f64, lambda: String },
    #[error("eigenvalue count mismatch in {window}: found {found}, expected {expected}")]
    CountMismatch {
        window: String,
        found: i64,
        expected: i64,
    },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("residue circle around {0} would enclose another pole")]
    PoleTooClose(String),
    #[error("evaluation at a pole: {0}")]
    AtPole(String),
    #[error("denominator vanishes in the Weyl-function reduction at {0}")]
    DenominatorZero(String),
    #[error("ambiguous asymptotic offset {0:.4}; cannot classify the boundary condition")]
    AmbiguousOffset(f64),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("derivative order {0} exceeds the supported maximum")]
    OrderTooHigh(usize),
    #[error("main equation singular at x = {x}: condition estimate {condition:e}")]
    Singular { x: f64, condition: f64 },
    #[error("contour passes through a pole at {0}")]
    ContourThroughPole(String),
    #[error("polynomial fit residual {residual:e} exceeds {limit:e} for {what}")]
    FitResidualTooLarge {
        what: String,
        residual: f64,
        limit: f64,
    },
    #[error("extrapolation unstable: relative residual {0:.3}")]
    FitUnstable(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
