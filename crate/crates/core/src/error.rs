use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid discriminant {0}: must be >= 5, non-square and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i64),

    #[error("invalid quadratic form [{a},{b},{c}]: {reason}")]
    InvalidForm { a: i64, b: i64, c: i64, reason: &'static str },

    #[error("form [{a},{b},{c}] is not reduced")]
    NotReduced { a: i64, b: i64, c: i64 },

    #[error("matrix has determinant {0}, expected 1")]
    NotUnimodular(i128),

    #[error("matrix with trace {0} is not hyperbolic")]
    NotHyperbolic(i128),

    #[error("parity violation: t + b*u must be even")]
    Parity,

    #[error("discriminant mismatch: form has {form}, Pell solution has {pell}")]
    DiscriminantMismatch { form: i64, pell: u64 },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("tolerance {tol:e} unreachable within {budget} terms for D={d}")]
    ToleranceUnreachable { d: u64, tol: f64, budget: u64 },

    #[error("no power of the fundamental unit of D={d} has trace {n}")]
    NoUnitPower { n: u64, d: u64 },

    #[error("quadrature did not reach tolerance {tol:e} within {max_depth} bisections")]
    QuadratureBudget { tol: f64, max_depth: u32 },

    #[error("weight table has no lambda for D={0}")]
    MissingWeight(u64),

    #[error("n={n}: {source}")]
    AtTrace { n: u64, source: Box<Error> },

    #[error("spectrum table covers X={have}, but X={need} is required")]
    TableTooSmall { have: f64, need: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
