use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root finder did not converge for {family} rule of size {size} after {iterations} iterations")]
    RootFinding {
        family: &'static str,
        size: usize,
        iterations: usize,
    },

    #[error("non-finite value {value} produced at x = {node}")]
    NonFinite { node: f64, value: f64 },

    #[error("state outside the domain of validity at {location}: {reason}")]
    Domain { location: String, reason: String },

    #[error("Newton iteration did not converge: residual {residual_norm:e} after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        residual_norm: f64,
        last_iterate: Vec<f64>,
    },

    #[error("singular Jacobian: pivot {pivot:e} in column {column} below threshold {threshold:e}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("ill-conditioned matrix: condition estimate {0:e}")]
    IllConditioned(f64),

    #[error("cochain length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{method} requires a partitioned (separable) system")]
    NoPartition { method: &'static str },

    #[error("time {time} outside trajectory range [{start}, {end}]")]
    OutOfRange { time: f64, start: f64, end: f64 },

    #[error("dense output is only available for mimetic integrators")]
    NoDenseOutput,

    #[error("step {index} at t = {time}")]
    Step {
        index: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(location: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Domain {
            location: location.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at_step(self, index: usize, time: f64) -> Self {
        Error::Step {
            index,
            time,
            source: Box::new(self),
        }
    }
}
