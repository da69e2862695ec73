//! Time integrators: the two mimetic schemes, the explicit baselines, and
//! the fixed-step integration loop that drives them.

mod baseline;
mod mimetic;
mod newton;
mod system;
mod tableau;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use baseline::{explicit_euler_step, rk4_step, symplectic_euler_step};
pub use mimetic::{
    default_q_rhs, mci_residual, mci_step, mgi_residual, mgi_step, ElementSolution, InitialGuess,
    MimeticStepper, Scheme, StepReport,
};
pub use newton::{newton_solve, JacobianMode, NewtonConfig, NewtonOutcome};
pub use system::{
    hamiltonian_vector_field, DomainFn, ExactFn, Invariant, JacobianFn, OdeSystem, Partition,
    ScalarFn, SubFieldFn, VectorFieldFn,
};
pub use tableau::{
    butcher_tableau_mci, gauss_collocation_tableau, irk_fixed_point_step, ButcherTableau,
    MAX_TABLEAU_ORDER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mci,
    Mgi,
    ExplicitEuler,
    SymplecticEuler,
    Rk4,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Mci,
        Method::Mgi,
        Method::ExplicitEuler,
        Method::SymplecticEuler,
        Method::Rk4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mci => "mci",
            Method::Mgi => "mgi",
            Method::ExplicitEuler => "euler",
            Method::SymplecticEuler => "seuler",
            Method::Rk4 => "rk4",
        }
    }

    pub fn is_mimetic(self) -> bool {
        matches!(self, Method::Mci | Method::Mgi)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method '{s}'; expected one of: {}",
                    Method::ALL.map(Method::name).join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Polynomial order `p_t` of the mimetic schemes.
    pub order: usize,
    /// MGI right-hand-side quadrature size; `None` means [`default_q_rhs`].
    pub q_rhs: Option<usize>,
    pub newton: NewtonConfig,
    pub initial_guess: InitialGuess,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            order: 2,
            q_rhs: None,
            newton: NewtonConfig::default(),
            initial_guess: InitialGuess::Constant,
        }
    }
}

impl IntegrateOptions {
    pub fn with_order(order: usize) -> Self {
        IntegrateOptions {
            order,
            ..Default::default()
        }
    }

    pub fn q_rhs_or_default(&self) -> usize {
        self.q_rhs.unwrap_or_else(|| default_q_rhs(self.order))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub method: Method,
    pub order: Option<usize>,
    pub dt: f64,
    /// Newton iterations per step (empty for explicit methods).
    pub newton_iterations: Vec<usize>,
}

/// Endpoint states of a fixed-step run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    invariant_labels: Vec<String>,
    /// `invariant_values[n][i]` is invariant `i` at `times[n]`.
    invariant_values: Vec<Vec<f64>>,
    elements: Vec<ElementSolution>,
    meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn invariant_labels(&self) -> &[String] {
        &self.invariant_labels
    }

    pub fn invariant_values(&self) -> &[Vec<f64>] {
        &self.invariant_values
    }

    /// Series of `I(t_n) - I(t_0)` for the invariant with this label.
    pub fn invariant_error(&self, label: &str) -> Option<Vec<f64>> {
        let idx = self.invariant_labels.iter().position(|l| l == label)?;
        let v0 = self.invariant_values[0][idx];
        Some(self.invariant_values.iter().map(|v| v[idx] - v0).collect())
    }

    /// `max_n |I(t_n) - I(t_0)|`.
    pub fn max_invariant_error(&self, label: &str) -> Option<f64> {
        self.invariant_error(label)
            .map(|e| e.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    pub fn elements(&self) -> &[ElementSolution] {
        &self.elements
    }

    pub fn meta(&self) -> &TrajectoryMeta {
        &self.meta
    }

    /// Dense output from the element polynomials; `result[n]` is the state
    /// at `times[n]`.
    pub fn sample(&self, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        if self.elements.is_empty() {
            return Err(Error::NoDenseOutput);
        }
        let start = self.times[0];
        let end = *self.times.last().unwrap();
        times
            .iter()
            .map(|&t| {
                if !(t >= start && t <= end) {
                    return Err(Error::OutOfRange { time: t, start, end });
                }
                if t == start {
                    return Ok(self.states[0].clone());
                }
                // Element e spans [times[e], times[e+1]].
                let e = match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
                    Ok(n) => n.saturating_sub(1),
                    Err(n) => n - 1,
                };
                Ok(self.elements[e].eval_at_time(t))
            })
            .collect()
    }
}

/// `[t0, tf]` split into steps of `dt`, the last one shortened to land on `tf`.
fn step_times(t0: f64, tf: f64, dt: f64) -> Vec<f64> {
    let span = tf - t0;
    let mut n = (span / dt).floor() as usize;
    // Absorb round-off so that an exact multiple does not produce a sliver.
    if span - (n as f64) * dt > 1e-9 * dt {
        n += 1;
    }
    let mut times: Vec<f64> = (0..n).map(|k| t0 + k as f64 * dt).collect();
    times.push(tf);
    times
}

/// Integrates `sys` from `(t0, y0)` to `tf` with fixed step `dt`.
pub fn integrate(
    sys: &OdeSystem,
    method: Method,
    y0: &[f64],
    t0: f64,
    tf: f64,
    dt: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(tf > t0) || !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need tf > t0 and dt > 0, got t0 = {t0}, tf = {tf}, dt = {dt}"
        )));
    }
    if y0.len() != sys.dimension() {
        return Err(Error::LengthMismatch {
            expected: sys.dimension(),
            actual: y0.len(),
        });
    }
    if method == Method::SymplecticEuler && sys.partition().is_none() {
        return Err(Error::NoPartition {
            method: "symplectic Euler",
        });
    }
    sys.check_domain(y0, || format!("initial condition (t = {t0})"))?;

    let grid_times = step_times(t0, tf, dt);
    let stepper = match method {
        Method::Mci => Some(MimeticStepper::new(Scheme::Canonical, opts.order)?),
        Method::Mgi => Some(MimeticStepper::new(
            Scheme::Galerkin {
                q_rhs: opts.q_rhs_or_default(),
            },
            opts.order,
        )?),
        _ => None,
    };

    let labels = sys.invariants().iter().map(|i| i.label.clone()).collect();
    let mut states = vec![y0.to_vec()];
    let mut invariant_values = vec![sys.invariant_values(y0)?];
    let mut elements: Vec<ElementSolution> = Vec::new();
    let mut newton_iterations = Vec::new();

    for (index, w) in grid_times.windows(2).enumerate() {
        let (ta, tb) = (w[0], w[1]);
        let h = tb - ta;
        let y = states.last().unwrap();
        let next = match (&stepper, method) {
            (Some(st), _) => {
                let previous = match opts.initial_guess {
                    InitialGuess::Extrapolate => elements.last(),
                    InitialGuess::Constant => None,
                };
                let rep = st
                    .step(sys, y, ta, h, &opts.newton, previous)
                    .map_err(|e| e.at_step(index, ta))?;
                newton_iterations.push(rep.iterations);
                let end = rep.solution.end_state();
                elements.push(rep.solution);
                Ok(end)
            }
            (None, Method::ExplicitEuler) => explicit_euler_step(sys, y, ta, h),
            (None, Method::SymplecticEuler) => symplectic_euler_step(sys, y, ta, h),
            (None, _) => rk4_step(sys, y, ta, h),
        }
        .map_err(|e| e.at_step(index, ta))?;
        sys.check_domain(&next, || format!("state after step {index}"))
            .map_err(|e| e.at_step(index, tb))?;
        invariant_values.push(sys.invariant_values(&next).map_err(|e| e.at_step(index, tb))?);
        states.push(next);
    }

    Ok(Trajectory {
        times: grid_times,
        states,
        invariant_labels: labels,
        invariant_values,
        elements,
        meta: TrajectoryMeta {
            method,
            order: method.is_mimetic().then_some(opts.order),
            dt,
            newton_iterations,
        },
    })
}
