//! Benchmark systems with their first integrals and reference settings.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrators::{OdeSystem, Partition};
use crate::linalg::Matrix;

/// Collision guard for the Kepler problem, on `q₁² + q₂²`.
pub const KEPLER_MIN_RADIUS_SQ: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub system: OdeSystem,
    /// Names of the state components, in state order.
    pub state_labels: Vec<&'static str>,
    pub initial_state: Vec<f64>,
    pub reference_dt: f64,
    pub reference_t_final: f64,
}

impl ProblemSpec {
    pub fn invariant_labels(&self) -> Vec<&str> {
        self.system.invariants().iter().map(|i| i.label.as_str()).collect()
    }
}

pub const PROBLEM_NAMES: [&str; 5] = ["circle", "lotka-volterra", "pendulum", "kepler", "harmonic"];

/// Looks a problem up by its registry name.
pub fn problem_by_name(name: &str) -> Result<ProblemSpec> {
    match name {
        "circle" => Ok(make_circle()),
        "lotka-volterra" => Ok(make_lotka_volterra()),
        "pendulum" => Ok(make_pendulum()),
        "kepler" => Ok(make_kepler()),
        "harmonic" => Ok(make_harmonic_oscillator()),
        _ => Err(Error::InvalidArgument(format!(
            "unknown problem '{name}'; available: {}",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}

pub fn all_problems() -> Vec<ProblemSpec> {
    PROBLEM_NAMES.iter().map(|n| problem_by_name(n).unwrap()).collect()
}

/// Rotation `(a, b) ↦ (a cos t + b sin t, b cos t - a sin t)`, the flow of
/// `da/dt = b, db/dt = -a`.
fn rotate(t: f64, y0: &[f64]) -> Vec<f64> {
    let (s, c) = t.sin_cos();
    vec![y0[0] * c + y0[1] * s, y0[1] * c - y0[0] * s]
}

/// `dp/dt = q`, `dq/dt = -p` with state `(y₁, y₂) = (p, q)`.
pub fn make_circle() -> ProblemSpec {
    let system = OdeSystem::new(2, |y| vec![y[1], -y[0]])
        .with_jacobian(|_| Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]))
        .with_invariant("H", |y| Ok(0.5 * (y[0] * y[0] + y[1] * y[1])))
        .with_invariant("R", |y| Ok(y[0].hypot(y[1])))
        .with_exact_solution(rotate)
        .with_partition(Partition {
            momentum: vec![0],
            position: vec![1],
            force: Arc::new(|q| vec![q[0]]),
            velocity: Arc::new(|p| vec![-p[0]]),
        });
    ProblemSpec {
        name: "circle",
        description: "circular motion, dp/dt = q, dq/dt = -p",
        system,
        state_labels: vec!["p", "q"],
        initial_state: vec![2.0, 0.0],
        reference_dt: 1.0,
        reference_t_final: 100.0,
    }
}

fn lotka_volterra_invariant(y: &[f64]) -> Result<f64> {
    if !(y[0] > 0.0 && y[1] > 0.0) {
        return Err(Error::domain(
            format!("V({}, {})", y[0], y[1]),
            "Lotka-Volterra invariant needs y1 > 0 and y2 > 0",
        ));
    }
    Ok(-y[0] + y[0].ln() - y[1] + 2.0 * y[1].ln())
}

/// `dy₁/dt = y₁(y₂ - 2)`, `dy₂/dt = y₂(1 - y₁)`.
pub fn make_lotka_volterra() -> ProblemSpec {
    let system = OdeSystem::new(2, |y| vec![y[0] * (y[1] - 2.0), y[1] * (1.0 - y[0])])
        .with_jacobian(|y| Matrix::from_rows(&[vec![y[1] - 2.0, y[0]], vec![-y[1], 1.0 - y[0]]]))
        .with_invariant("V", lotka_volterra_invariant)
        .with_domain(|y| {
            if y[0] > 0.0 && y[1] > 0.0 {
                Ok(())
            } else {
                Err("populations must stay positive".into())
            }
        });
    ProblemSpec {
        name: "lotka-volterra",
        description: "Lotka-Volterra, dy1/dt = y1 (y2 - 2), dy2/dt = y2 (1 - y1)",
        system,
        state_labels: vec!["y1", "y2"],
        initial_state: vec![3.0, 3.0],
        reference_dt: 0.3,
        reference_t_final: 100.0,
    }
}

pub fn pendulum_hamiltonian(y: &[f64]) -> f64 {
    0.5 * y[0] * y[0] - 10.0 * y[1].cos()
}

/// `dp/dt = -10 sin q`, `dq/dt = p` with state `(p, q)`.
pub fn make_pendulum() -> ProblemSpec {
    let system = OdeSystem::new(2, |y| vec![-10.0 * y[1].sin(), y[0]])
        .with_jacobian(|y| Matrix::from_rows(&[vec![0.0, -10.0 * y[1].cos()], vec![1.0, 0.0]]))
        .with_invariant("H", |y| Ok(pendulum_hamiltonian(y)))
        .with_partition(Partition {
            momentum: vec![0],
            position: vec![1],
            force: Arc::new(|q| vec![-10.0 * q[0].sin()]),
            velocity: Arc::new(|p| vec![p[0]]),
        });
    ProblemSpec {
        name: "pendulum",
        description: "pendulum, dp/dt = -10 sin q, dq/dt = p",
        system,
        state_labels: vec!["p", "q"],
        initial_state: vec![0.0, FRAC_PI_2],
        reference_dt: 0.1,
        reference_t_final: 100.0,
    }
}

pub fn kepler_hamiltonian(y: &[f64]) -> f64 {
    0.5 * (y[0] * y[0] + y[1] * y[1]) - 1.0 / (y[2] * y[2] + y[3] * y[3]).sqrt()
}

pub fn kepler_angular_momentum(y: &[f64]) -> f64 {
    y[2] * y[1] - y[3] * y[0]
}

/// Two-body Kepler problem with state `(p₁, p₂, q₁, q₂)`.
pub fn make_kepler() -> ProblemSpec {
    let system = OdeSystem::new(4, |y| {
        let r2 = y[2] * y[2] + y[3] * y[3];
        let r3 = r2 * r2.sqrt();
        vec![-y[2] / r3, -y[3] / r3, y[0], y[1]]
    })
    .with_jacobian(|y| {
        let (q1, q2) = (y[2], y[3]);
        let r2 = q1 * q1 + q2 * q2;
        let r5 = r2 * r2 * r2.sqrt();
        let mut j = Matrix::zeros(4, 4);
        j[(0, 2)] = (3.0 * q1 * q1 - r2) / r5;
        j[(0, 3)] = 3.0 * q1 * q2 / r5;
        j[(1, 2)] = 3.0 * q1 * q2 / r5;
        j[(1, 3)] = (3.0 * q2 * q2 - r2) / r5;
        j[(2, 0)] = 1.0;
        j[(3, 1)] = 1.0;
        j
    })
    .with_invariant("H", |y| Ok(kepler_hamiltonian(y)))
    .with_invariant("L", |y| Ok(kepler_angular_momentum(y)))
    .with_domain(|y| {
        let r2 = y[2] * y[2] + y[3] * y[3];
        if r2 >= KEPLER_MIN_RADIUS_SQ {
            Ok(())
        } else {
            Err(format!("collision: q1^2 + q2^2 = {r2:e}"))
        }
    })
    .with_partition(Partition {
        momentum: vec![0, 1],
        position: vec![2, 3],
        force: Arc::new(|q| {
            let r2 = q[0] * q[0] + q[1] * q[1];
            let r3 = r2 * r2.sqrt();
            vec![-q[0] / r3, -q[1] / r3]
        }),
        velocity: Arc::new(|p| p.to_vec()),
    });
    ProblemSpec {
        name: "kepler",
        description: "two-body Kepler problem, state (p1, p2, q1, q2)",
        system,
        state_labels: vec!["p1", "p2", "q1", "q2"],
        initial_state: vec![0.0, 2.0, 0.4, 0.0],
        reference_dt: 0.1,
        reference_t_final: 50.0,
    }
}

/// `dq/dt = p`, `dp/dt = -q` with state `(q, p)`.
pub fn make_harmonic_oscillator() -> ProblemSpec {
    let system = OdeSystem::new(2, |y| vec![y[1], -y[0]])
        .with_jacobian(|_| Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]))
        .with_invariant("I", |y| Ok(y[0] * y[0] + y[1] * y[1]))
        .with_exact_solution(rotate)
        .with_partition(Partition {
            momentum: vec![1],
            position: vec![0],
            force: Arc::new(|q| vec![-q[0]]),
            velocity: Arc::new(|p| vec![p[0]]),
        });
    ProblemSpec {
        name: "harmonic",
        description: "harmonic oscillator, dq/dt = p, dp/dt = -q",
        system,
        state_labels: vec!["q", "p"],
        initial_state: vec![1.0, 0.0],
        reference_dt: 0.1,
        reference_t_final: 10.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{explicit_euler_step, hamiltonian_vector_field};
    use approx::assert_abs_diff_eq;

    fn inv(p: &ProblemSpec, label: &str, y: &[f64]) -> Result<f64> {
        let i = p.system.invariants().iter().find(|i| i.label == label).unwrap();
        (i.eval)(y)
    }

    #[test]
    fn circle_values() {
        let c = make_circle();
        assert_eq!(c.system.eval(&[2.0, 0.0]), vec![0.0, -2.0]);
        assert_eq!(inv(&c, "H", &[2.0, 0.0]).unwrap(), 2.0);
        assert_eq!(inv(&c, "R", &[2.0, 0.0]).unwrap(), 2.0);
        let e = c.system.exact_solution(FRAC_PI_2, &[2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(e[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], -2.0, epsilon = 1e-15);
    }

    #[test]
    fn lotka_volterra_values() {
        let lv = make_lotka_volterra();
        assert_eq!(lv.system.eval(&[3.0, 3.0]), vec![3.0, -6.0]);
        assert_abs_diff_eq!(inv(&lv, "V", &[3.0, 3.0]).unwrap(), -6.0 + 3.0 * 3f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(inv(&lv, "V", &[3.0, 3.0]).unwrap(), -2.70416, epsilon = 1e-5);
        assert!(matches!(inv(&lv, "V", &[0.0, 1.0]), Err(Error::Domain { .. })));
        assert!(lv.system.partition().is_none());
    }

    #[test]
    fn pendulum_values() {
        let p = make_pendulum();
        assert_eq!(p.system.eval(&[0.0, FRAC_PI_2]), vec![-10.0, 0.0]);
        assert_abs_diff_eq!(inv(&p, "H", &[0.0, FRAC_PI_2]).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn kepler_values() {
        let k = make_kepler();
        let y0 = &k.initial_state;
        assert_abs_diff_eq!(inv(&k, "H", y0).unwrap(), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(inv(&k, "L", y0).unwrap(), 0.8, epsilon = 1e-15);
        for (a, b) in k.system.eval(y0).iter().zip([-6.25, 0.0, 0.0, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-13);
        }
        assert!(k.system.check_domain(&[0.0, 0.0, 0.0, 0.0], || "origin".into()).is_err());
    }

    #[test]
    fn harmonic_values() {
        let h = make_harmonic_oscillator();
        assert_eq!(h.system.eval(&[1.0, 0.0]), vec![0.0, -1.0]);
        assert_eq!(inv(&h, "I", &[1.0, 0.0]).unwrap(), 1.0);
        let y = explicit_euler_step(&h.system, &[1.0, 0.0], 0.0, 0.1).unwrap();
        assert_abs_diff_eq!(inv(&h, "I", &y).unwrap(), 1.01, epsilon = 1e-15);
    }

    #[test]
    fn registry_lookup() {
        for n in PROBLEM_NAMES {
            assert_eq!(problem_by_name(n).unwrap().name, n);
        }
        let err = problem_by_name("foo").unwrap_err().to_string();
        assert!(err.contains("circle") && err.contains("kepler"));
    }

    #[test]
    fn pendulum_field_is_hamiltonian() {
        let p = make_pendulum();
        let h = hamiltonian_vector_field(|y: &[f64]| vec![y[0], 10.0 * y[1].sin()], 1);
        for k in 0..20 {
            let y = [-3.0 + 0.31 * k as f64, 0.7 * k as f64 - 6.0];
            for (a, b) in h(&y).iter().zip(p.system.eval(&y)) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-13);
            }
        }
    }
}
