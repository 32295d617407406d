use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("system definition error: {0}")]
    System(String),

    #[error("smoothness violation: {0}")]
    Smoothness(String),

    #[error("bracket of weight {weight} exceeds the declared step {step}")]
    WeightExceedsStep { weight: usize, step: usize },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("Hormander condition fails at {point:?}: rank {rank} < {dim}")]
    RankDeficient {
        point: Vec<f64>,
        rank: usize,
        dim: usize,
    },

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("point lies outside the Taylor validity radius ({distance} > {radius})")]
    OutsideValidity { distance: f64, radius: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("Newton iteration did not converge: {0}")]
    Convergence(String),

    #[error("target not reached within the search budget (distance > {bound})")]
    Unreachable { bound: f64 },

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("test function support violation: {0}")]
    Support(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
