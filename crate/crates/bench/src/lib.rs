//! Shared workloads for the criterion benchmarks.

use geodesy::integrators::{MimeticStepper, Scheme};
use geodesy::problems::{self, ProblemSpec};

pub fn kepler() -> ProblemSpec {
    problems::make_kepler()
}

pub fn pendulum() -> ProblemSpec {
    problems::make_pendulum()
}

pub fn stepper(scheme: Scheme, order: usize) -> MimeticStepper {
    MimeticStepper::new(scheme, order).expect("valid order")
}
