use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub type VectorFieldFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;
pub type DomainFn = Arc<dyn Fn(&[f64]) -> std::result::Result<(), String> + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
pub type SubFieldFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A named first integral.
#[derive(Clone)]
pub struct Invariant {
    pub label: String,
    pub eval: ScalarFn,
}

impl fmt::Debug for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Invariant").field("label", &self.label).finish()
    }
}

/// Split `dp/dt = force(q)`, `dq/dt = velocity(p)` used by symplectic Euler.
/// `momentum` and `position` index into the state vector.
#[derive(Clone)]
pub struct Partition {
    pub momentum: Vec<usize>,
    pub position: Vec<usize>,
    pub force: SubFieldFn,
    pub velocity: SubFieldFn,
}

/// Autonomous system `dy/dt = h(y)`.
#[derive(Clone)]
pub struct OdeSystem {
    dimension: usize,
    field: VectorFieldFn,
    jacobian: Option<JacobianFn>,
    invariants: Vec<Invariant>,
    partition: Option<Partition>,
    exact: Option<ExactFn>,
    domain: Option<DomainFn>,
}

impl fmt::Debug for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeSystem")
            .field("dimension", &self.dimension)
            .field("jacobian", &self.jacobian.is_some())
            .field("invariants", &self.invariants)
            .field("partition", &self.partition.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl OdeSystem {
    pub fn new<F>(dimension: usize, field: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        assert!(dimension > 0, "system dimension must be positive");
        OdeSystem {
            dimension,
            field: Arc::new(field),
            jacobian: None,
            invariants: Vec::new(),
            partition: None,
            exact: None,
            domain: None,
        }
    }

    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn with_invariant<I>(mut self, label: impl Into<String>, eval: I) -> Self
    where
        I: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        self.invariants.push(Invariant {
            label: label.into(),
            eval: Arc::new(eval),
        });
        self
    }

    pub fn with_partition(mut self, partition: Partition) -> Self {
        self.partition = Some(partition);
        self
    }

    /// `exact(t, y0)` is the state at time `t` after starting from `y0` at 0.
    pub fn with_exact_solution<E>(mut self, exact: E) -> Self
    where
        E: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn with_domain<D>(mut self, check: D) -> Self
    where
        D: Fn(&[f64]) -> std::result::Result<(), String> + Send + Sync + 'static,
    {
        self.domain = Some(Arc::new(check));
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        (self.field)(y)
    }

    pub fn jacobian(&self) -> Option<&JacobianFn> {
        self.jacobian.as_ref()
    }

    pub fn invariants(&self) -> &[Invariant] {
        &self.invariants
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn exact_solution(&self, t: f64, y0: &[f64]) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|e| e(t, y0))
    }

    pub fn has_exact_solution(&self) -> bool {
        self.exact.is_some()
    }

    pub fn check_domain(&self, y: &[f64], location: impl FnOnce() -> String) -> Result<()> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(location(), "non-finite state"));
        }
        match &self.domain {
            Some(check) => check(y).map_err(|reason| Error::domain(location(), reason)),
            None => Ok(()),
        }
    }

    /// Evaluates `h` after checking the domain; non-finite output is an error.
    pub fn eval_checked(&self, y: &[f64], location: impl Fn() -> String) -> Result<Vec<f64>> {
        self.check_domain(y, &location)?;
        let h = self.eval(y);
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(location(), "vector field is not finite"));
        }
        Ok(h)
    }

    pub fn invariant_values(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.invariants.iter().map(|i| (i.eval)(y)).collect()
    }

    /// The system `dy/dt = -h(y)`; one step of it with `+Δt` is a step of the
    /// original system with `-Δt`.
    pub fn time_reversed(&self) -> OdeSystem {
        let field = Arc::clone(&self.field);
        let jacobian = self.jacobian.as_ref().map(|j| {
            let j = Arc::clone(j);
            Arc::new(move |y: &[f64]| j(y).scale(-1.0)) as JacobianFn
        });
        let partition = self.partition.as_ref().map(|p| {
            let force = Arc::clone(&p.force);
            let velocity = Arc::clone(&p.velocity);
            Partition {
                momentum: p.momentum.clone(),
                position: p.position.clone(),
                force: Arc::new(move |q: &[f64]| force(q).into_iter().map(|v| -v).collect()),
                velocity: Arc::new(move |p: &[f64]| velocity(p).into_iter().map(|v| -v).collect()),
            }
        });
        let exact = self.exact.as_ref().map(|e| {
            let e = Arc::clone(e);
            Arc::new(move |t: f64, y0: &[f64]| e(-t, y0)) as ExactFn
        });
        OdeSystem {
            dimension: self.dimension,
            field: Arc::new(move |y: &[f64]| field(y).into_iter().map(|v| -v).collect()),
            jacobian,
            invariants: self.invariants.clone(),
            partition,
            exact,
            domain: self.domain.clone(),
        }
    }

    /// Forward-difference Jacobian, column `j` perturbed by `step · (1 + |y_j|)`.
    pub fn fd_jacobian(&self, y: &[f64], step: f64) -> Matrix {
        let m = self.dimension;
        let h0 = self.eval(y);
        let mut jac = Matrix::zeros(m, m);
        let mut yp = y.to_vec();
        for j in 0..m {
            let dh = step * (1.0 + y[j].abs());
            yp[j] = y[j] + dh;
            let h1 = self.eval(&yp);
            for i in 0..m {
                jac[(i, j)] = (h1[i] - h0[i]) / dh;
            }
            yp[j] = y[j];
        }
        jac
    }
}

/// `h(y) = J⁻¹ ∇H(y)` with `y = (p₁…p_m, q₁…q_m)` and `J = [[0, I], [-I, 0]]`,
/// i.e. `dp/dt = -∂H/∂q`, `dq/dt = ∂H/∂p`.
pub fn hamiltonian_vector_field<G>(grad_h: G, m: usize) -> impl Fn(&[f64]) -> Vec<f64> + Send + Sync
where
    G: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    assert!(m >= 1, "need at least one degree of freedom");
    move |y: &[f64]| {
        let g = grad_h(y);
        debug_assert_eq!(g.len(), 2 * m);
        let mut h = vec![0.0; 2 * m];
        for i in 0..m {
            h[i] = -g[m + i];
            h[m + i] = g[i];
        }
        h
    }
}
