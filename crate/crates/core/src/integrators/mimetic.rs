//! One-element solvers for the canonical-Hodge (MCI) and Galerkin-Hodge
//! (MGI) integrators.
//!
//! The trajectory on an element is `y_h(τ) = Σ_k y^k l_k(τ)` on the GLL
//! nodes. Column `k = 0` is the element's initial condition; the remaining
//! `M · p` coefficients are the Newton unknowns, flattened variable-major
//! (`index = i · p + (k - 1)`). Residual rows use the same layout with the
//! dual-node index `j` in place of `k - 1`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mimetic::{incidence_matrix, ElementGrid, ReferenceElement};
use crate::spectral::gauss_rule;

use super::newton::{newton_solve, NewtonConfig, NewtonOutcome};
use super::system::OdeSystem;

/// Default number of Gauss points for the MGI right-hand side.
pub fn default_q_rhs(p: usize) -> usize {
    2 * p + 10
}

/// Stage coefficients of one time element.
#[derive(Debug, Clone)]
pub struct ElementSolution {
    grid: ElementGrid,
    /// `coefficients[i][k] = y_i^k`.
    coefficients: Vec<Vec<f64>>,
}

impl ElementSolution {
    pub fn new(grid: ElementGrid, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        let p = grid.order();
        if coefficients.is_empty() || coefficients.iter().any(|row| row.len() != p + 1) {
            return Err(Error::InvalidArgument(format!(
                "element coefficients must be M x {}",
                p + 1
            )));
        }
        Ok(ElementSolution { grid, coefficients })
    }

    /// Constant extension `y^k = y0` for all `k`.
    pub fn constant(grid: ElementGrid, y0: &[f64]) -> Self {
        let p = grid.order();
        let coefficients = y0.iter().map(|&v| vec![v; p + 1]).collect();
        ElementSolution { grid, coefficients }
    }

    pub fn grid(&self) -> &ElementGrid {
        &self.grid
    }

    pub fn order(&self) -> usize {
        self.grid.order()
    }

    pub fn dimension(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    /// State at primal node `k`.
    pub fn stage(&self, k: usize) -> Vec<f64> {
        self.coefficients.iter().map(|row| row[k]).collect()
    }

    pub fn initial_state(&self) -> Vec<f64> {
        self.stage(0)
    }

    /// State at `τ = 1`, the hand-off to the next element.
    pub fn end_state(&self) -> Vec<f64> {
        self.stage(self.order())
    }

    /// `y_h(τ)`.
    pub fn eval(&self, tau: f64) -> Vec<f64> {
        let l = self.grid.reference().primal_basis().eval_all(tau);
        combine(&self.coefficients, &l)
    }

    /// `y_h` at time `t`.
    pub fn eval_at_time(&self, t: f64) -> Vec<f64> {
        self.eval(self.grid.tau_of(t))
    }

    fn unknowns(&self) -> Vec<f64> {
        let p = self.order();
        self.coefficients
            .iter()
            .flat_map(|row| row[1..=p].iter().copied())
            .collect()
    }

    fn set_unknowns(&mut self, x: &[f64]) {
        let p = self.order();
        for (i, row) in self.coefficients.iter_mut().enumerate() {
            row[1..=p].copy_from_slice(&x[i * p..(i + 1) * p]);
        }
    }
}

fn combine(coefficients: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    coefficients
        .iter()
        .map(|row| row.iter().zip(weights).map(|(c, w)| c * w).sum())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Canonical Hodge: collocation of `h` at the dual (Gauss) nodes.
    Canonical,
    /// Galerkin Hodge: `L²` projection of `h` onto the dual basis, with the
    /// right-hand side integrated by a `q_rhs`-point Gauss rule.
    Galerkin { q_rhs: usize },
}

#[derive(Debug, Clone)]
struct GalerkinQuadrature {
    weights: Vec<f64>,
    /// `l_k(s_q)`, q × (p+1).
    nodal: Matrix,
    /// `l̃_m(s_q)`, q × p.
    dual: Matrix,
}

/// How the Newton iteration is seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialGuess {
    /// `y^k = y0`.
    #[default]
    Constant,
    /// Extrapolate the previous element's polynomial when one is available.
    Extrapolate,
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub solution: ElementSolution,
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Precomputed operators for stepping one scheme at a fixed order.
#[derive(Debug, Clone)]
pub struct MimeticStepper {
    scheme: Scheme,
    reference: Arc<ReferenceElement>,
    /// `d l_k/dτ (τ̃ʲ)` assembled as `A · Eᵀ`, p × (p+1).
    deriv_at_dual: Matrix,
    galerkin: Option<GalerkinQuadrature>,
}

impl MimeticStepper {
    pub fn new(scheme: Scheme, order: usize) -> Result<Self> {
        let reference = Arc::new(ReferenceElement::new(order)?);
        Self::with_reference(scheme, reference)
    }

    pub fn with_reference(scheme: Scheme, reference: Arc<ReferenceElement>) -> Result<Self> {
        let p = reference.order();
        let e = incidence_matrix(p)?;
        let a = reference.edge_at_dual();
        let mut deriv_at_dual = Matrix::zeros(p, p + 1);
        for j in 0..p {
            for k in 0..=p {
                deriv_at_dual[(j, k)] = (0..p).map(|l| a[(j, l)] * e.get(k, l) as f64).sum();
            }
        }
        let galerkin = match scheme {
            Scheme::Canonical => None,
            Scheme::Galerkin { q_rhs } => {
                if q_rhs < p {
                    return Err(Error::InvalidArgument(format!(
                        "q_rhs must be at least p = {p}, got {q_rhs}"
                    )));
                }
                let rule = gauss_rule(q_rhs)?;
                let nodal = Matrix::from_rows(
                    &rule
                        .nodes()
                        .iter()
                        .map(|&s| reference.primal_basis().eval_all(s))
                        .collect::<Vec<_>>(),
                );
                let dual = Matrix::from_rows(
                    &rule
                        .nodes()
                        .iter()
                        .map(|&s| reference.dual_basis().eval_all(s))
                        .collect::<Vec<_>>(),
                );
                Some(GalerkinQuadrature {
                    weights: rule.weights().to_vec(),
                    nodal,
                    dual,
                })
            }
        };
        Ok(MimeticStepper {
            scheme,
            reference,
            deriv_at_dual,
            galerkin,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn order(&self) -> usize {
        self.reference.order()
    }

    pub fn reference(&self) -> &Arc<ReferenceElement> {
        &self.reference
    }

    pub fn grid(&self, t0: f64, dt: f64) -> Result<ElementGrid> {
        ElementGrid::with_reference(Arc::clone(&self.reference), t0, t0 + dt)
    }

    fn check_solution(&self, sys: &OdeSystem, sol: &ElementSolution) -> Result<()> {
        if sol.order() != self.order() {
            return Err(Error::InvalidArgument(format!(
                "element of order {} given to stepper of order {}",
                sol.order(),
                self.order()
            )));
        }
        if sol.dimension() != sys.dimension() {
            return Err(Error::LengthMismatch {
                expected: sys.dimension(),
                actual: sol.dimension(),
            });
        }
        Ok(())
    }

    /// `(1/√g) Σ_l (y^l - y^{l-1}) e_l(τ̃ʲ)` for every variable and dual node.
    fn time_derivative_at_dual(&self, sol: &ElementSolution) -> Vec<Vec<f64>> {
        let inv_metric = 1.0 / sol.grid.metric();
        sol.coefficients
            .iter()
            .map(|row| {
                let diffs: Vec<f64> = row.windows(2).map(|w| w[1] - w[0]).collect();
                self.reference
                    .edge_at_dual()
                    .mul_vec(&diffs)
                    .into_iter()
                    .map(|d| d * inv_metric)
                    .collect()
            })
            .collect()
    }

    /// Stage residual; zero iff the element satisfies the scheme's equations.
    pub fn residual(&self, sys: &OdeSystem, sol: &ElementSolution) -> Result<Vec<f64>> {
        self.check_solution(sys, sol)?;
        let p = self.order();
        let m = sys.dimension();
        let deriv = self.time_derivative_at_dual(sol);
        let mut out = vec![0.0; m * p];
        match &self.galerkin {
            None => {
                let nodal = self.reference.nodal_at_dual();
                for j in 0..p {
                    let y = combine(&sol.coefficients, nodal.row(j));
                    let h = sys.eval_checked(&y, || {
                        format!("dual node {j} (t = {})", sol.grid.time_of(self.reference.dual_nodes()[j]))
                    })?;
                    for i in 0..m {
                        out[i * p + j] = deriv[i][j] - h[i];
                    }
                }
            }
            Some(gq) => {
                let w = self.reference.dual_weights();
                for i in 0..m {
                    for j in 0..p {
                        out[i * p + j] = w[j] * deriv[i][j];
                    }
                }
                for (q, &wq) in gq.weights.iter().enumerate() {
                    let y = combine(&sol.coefficients, gq.nodal.row(q));
                    let h = sys.eval_checked(&y, || format!("quadrature node {q}"))?;
                    let dual = gq.dual.row(q);
                    for i in 0..m {
                        let hw = wq * h[i];
                        for j in 0..p {
                            out[i * p + j] -= hw * dual[j];
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn jacobian(&self, sys: &OdeSystem, sol: &ElementSolution) -> Result<Matrix> {
        let jac_fn = sys.jacobian().expect("analytic Jacobian requested without one");
        let p = self.order();
        let m = sys.dimension();
        let inv_metric = 1.0 / sol.grid.metric();
        let n = m * p;
        let mut jac = Matrix::zeros(n, n);
        let lhs_weight = |j: usize| match &self.galerkin {
            None => 1.0,
            Some(_) => self.reference.dual_weights()[j],
        };
        for i in 0..m {
            for j in 0..p {
                let w = lhs_weight(j) * inv_metric;
                for k in 1..=p {
                    jac[(i * p + j, i * p + k - 1)] += w * self.deriv_at_dual[(j, k)];
                }
            }
        }
        match &self.galerkin {
            None => {
                let nodal = self.reference.nodal_at_dual();
                for j in 0..p {
                    let y = combine(&sol.coefficients, nodal.row(j));
                    let jy = jac_fn(&y);
                    for i in 0..m {
                        for ii in 0..m {
                            let dji = jy[(i, ii)];
                            if dji == 0.0 {
                                continue;
                            }
                            for k in 1..=p {
                                jac[(i * p + j, ii * p + k - 1)] -= dji * nodal[(j, k)];
                            }
                        }
                    }
                }
            }
            Some(gq) => {
                for (q, &wq) in gq.weights.iter().enumerate() {
                    let y = combine(&sol.coefficients, gq.nodal.row(q));
                    let jy = jac_fn(&y);
                    for i in 0..m {
                        for ii in 0..m {
                            let dji = wq * jy[(i, ii)];
                            if dji == 0.0 {
                                continue;
                            }
                            for j in 0..p {
                                let c = dji * gq.dual[(q, j)];
                                for k in 1..=p {
                                    jac[(i * p + j, ii * p + k - 1)] -= c * gq.nodal[(q, k)];
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(jac)
    }

    fn initial_guess(&self, grid: ElementGrid, y0: &[f64], previous: Option<&ElementSolution>) -> ElementSolution {
        let mut guess = ElementSolution::constant(grid, y0);
        if let Some(prev) = previous {
            let p = self.order();
            let nodes = self.reference.primal_nodes();
            let prev_basis = prev.grid.reference().primal_basis();
            for k in 1..=p {
                let t = guess.grid.time_of(nodes[k]);
                let tau_prev = prev.grid.tau_of(t);
                let y = combine(&prev.coefficients, &prev_basis.eval_all(tau_prev));
                let y_start = prev.end_state();
                for i in 0..y0.len() {
                    // Shift so that the extrapolation starts exactly at y0.
                    guess.coefficients[i][k] = y[i] - y_start[i] + y0[i];
                }
            }
        }
        guess
    }

    /// Rounding level of the residual near `y0`. Differences of stage values
    /// carry an error of order `ε|y|`, amplified by `1/√g`, so very small
    /// steps cannot reach an absolute tolerance below this.
    pub fn roundoff_floor(&self, sys: &OdeSystem, y0: &[f64], metric: f64) -> f64 {
        let scale_y = y0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale_h = sys.eval(y0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let weight = match self.scheme {
            Scheme::Canonical => 1.0,
            Scheme::Galerkin { .. } => self.reference.dual_weights().iter().fold(0.0, |m: f64, w| m.max(*w)),
        };
        let a = self.reference.edge_at_dual();
        let norm_inf = (0..a.rows()).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        4.0 * f64::EPSILON * weight * (scale_y * norm_inf / metric + scale_h)
    }

    /// Solves one element `[t0, t0 + dt]` starting from `y0`.
    pub fn step(
        &self,
        sys: &OdeSystem,
        y0: &[f64],
        t0: f64,
        dt: f64,
        cfg: &NewtonConfig,
        previous: Option<&ElementSolution>,
    ) -> Result<StepReport> {
        if y0.len() != sys.dimension() {
            return Err(Error::LengthMismatch {
                expected: sys.dimension(),
                actual: y0.len(),
            });
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
        }
        sys.check_domain(y0, || format!("initial condition (t = {t0})"))?;
        let grid = self.grid(t0, dt)?;
        let cfg = &NewtonConfig {
            abs_tol: cfg.abs_tol.max(self.roundoff_floor(sys, y0, grid.metric())),
            ..*cfg
        };
        let mut work = self.initial_guess(grid, y0, previous);
        let x0 = work.unknowns();

        let residual = |x: &[f64]| {
            let mut trial = work.clone();
            trial.set_unknowns(x);
            self.residual(sys, &trial)
        };
        let analytic = sys.jacobian().map(|_| {
            |x: &[f64]| {
                let mut trial = work.clone();
                trial.set_unknowns(x);
                self.jacobian(sys, &trial)
            }
        });
        let NewtonOutcome {
            solution,
            iterations,
            residual_norm,
        } = newton_solve(residual, analytic, &x0, cfg)?;
        work.set_unknowns(&solution);
        Ok(StepReport {
            solution: work,
            iterations,
            residual_norm,
        })
    }
}

/// MCI stage residual of an element.
pub fn mci_residual(sys: &OdeSystem, sol: &ElementSolution) -> Result<Vec<f64>> {
    MimeticStepper::with_reference(Scheme::Canonical, sol.grid().shared_reference())?.residual(sys, sol)
}

/// MGI stage residual of an element with a `q_rhs`-point right-hand side.
pub fn mgi_residual(sys: &OdeSystem, sol: &ElementSolution, q_rhs: usize) -> Result<Vec<f64>> {
    MimeticStepper::with_reference(Scheme::Galerkin { q_rhs }, sol.grid().shared_reference())?
        .residual(sys, sol)
}

pub fn mci_step(
    sys: &OdeSystem,
    y0: &[f64],
    t0: f64,
    dt: f64,
    p: usize,
    cfg: &NewtonConfig,
) -> Result<ElementSolution> {
    Ok(MimeticStepper::new(Scheme::Canonical, p)?
        .step(sys, y0, t0, dt, cfg, None)?
        .solution)
}

pub fn mgi_step(
    sys: &OdeSystem,
    y0: &[f64],
    t0: f64,
    dt: f64,
    p: usize,
    q_rhs: usize,
    cfg: &NewtonConfig,
) -> Result<ElementSolution> {
    Ok(MimeticStepper::new(Scheme::Galerkin { q_rhs }, p)?
        .step(sys, y0, t0, dt, cfg, None)?
        .solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::newton::JacobianMode;
    use approx::assert_abs_diff_eq;

    fn oscillator() -> OdeSystem {
        // (q, p): dq/dt = p, dp/dt = -q.
        OdeSystem::new(2, |y| vec![y[1], -y[0]])
            .with_jacobian(|_| Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]))
    }

    #[test]
    fn midpoint_stage_has_zero_residual() {
        let grid = ElementGrid::new(1, 0.0, 1.0).unwrap();
        let sol = ElementSolution::new(grid, vec![vec![1.0, 0.6], vec![0.0, -0.8]]).unwrap();
        let r = mci_residual(&oscillator(), &sol).unwrap();
        assert!(r.iter().all(|v| v.abs() <= 1e-12), "{r:?}");
    }

    #[test]
    fn equilibrium_has_zero_residual() {
        let sys = OdeSystem::new(3, |_| vec![0.0; 3]);
        let grid = ElementGrid::new(3, 0.0, 0.5).unwrap();
        let sol = ElementSolution::constant(grid, &[1.0, -2.0, 3.0]);
        assert!(mci_residual(&sys, &sol).unwrap().iter().all(|&v| v == 0.0));
        assert!(mgi_residual(&sys, &sol, 7).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mci_step_reproduces_midpoint() {
        let sol = mci_step(&oscillator(), &[1.0, 0.0], 0.0, 1.0, 1, &NewtonConfig::default()).unwrap();
        let end = sol.end_state();
        assert_abs_diff_eq!(end[0], 0.6, epsilon = 1e-14);
        assert_abs_diff_eq!(end[1], -0.8, epsilon = 1e-14);
        assert_eq!(sol.initial_state(), vec![1.0, 0.0]);
    }

    #[test]
    fn linear_system_one_newton_iteration() {
        let stepper = MimeticStepper::new(Scheme::Canonical, 4).unwrap();
        let rep = stepper
            .step(&oscillator(), &[0.3, 0.7], 0.0, 0.8, &NewtonConfig::default(), None)
            .unwrap();
        assert_eq!(rep.iterations, 1);
        let stepper = MimeticStepper::new(Scheme::Galerkin { q_rhs: 18 }, 4).unwrap();
        let rep = stepper
            .step(&oscillator(), &[0.3, 0.7], 0.0, 0.8, &NewtonConfig::default(), None)
            .unwrap();
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn mgi_p1_is_averaged_vector_field() {
        // dy/dt = λy: AVF gives y1 = y0 (1 + λΔt/2) / (1 - λΔt/2).
        let lambda = -0.7;
        let sys = OdeSystem::new(1, move |y| vec![lambda * y[0]]);
        let dt = 0.9;
        let sol = mgi_step(&sys, &[2.0], 0.0, dt, 1, 3, &NewtonConfig::default()).unwrap();
        let expected = 2.0 * (1.0 + 0.5 * lambda * dt) / (1.0 - 0.5 * lambda * dt);
        assert_abs_diff_eq!(sol.end_state()[0], expected, epsilon = 1e-13);
    }

    #[test]
    fn analytic_and_fd_jacobians_agree() {
        let sys = OdeSystem::new(2, |y| vec![y[1], -10.0 * y[0].sin()])
            .with_jacobian(|y| Matrix::from_rows(&[vec![0.0, 1.0], vec![-10.0 * y[0].cos(), 0.0]]));
        let fd = NewtonConfig {
            jacobian_mode: JacobianMode::ForwardDifference,
            ..Default::default()
        };
        for scheme in [Scheme::Canonical, Scheme::Galerkin { q_rhs: 14 }] {
            let st = MimeticStepper::new(scheme, 3).unwrap();
            let a = st.step(&sys, &[1.2, 0.1], 0.0, 0.3, &NewtonConfig::default(), None).unwrap();
            let b = st.step(&sys, &[1.2, 0.1], 0.0, 0.3, &fd, None).unwrap();
            for (x, y) in a.solution.end_state().iter().zip(b.solution.end_state()) {
                assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
            }
            // The assembled Jacobian equals a central-difference estimate.
            let sol = a.solution.clone();
            let jac = st.jacobian(&sys, &sol).unwrap();
            let x = sol.unknowns();
            let h = 1e-6;
            for col in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[col] += h;
                xm[col] -= h;
                let mut sp = sol.clone();
                sp.set_unknowns(&xp);
                let mut sm = sol.clone();
                sm.set_unknowns(&xm);
                let rp = st.residual(&sys, &sp).unwrap();
                let rm = st.residual(&sys, &sm).unwrap();
                for row in 0..x.len() {
                    let est = (rp[row] - rm[row]) / (2.0 * h);
                    assert_abs_diff_eq!(jac[(row, col)], est, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn zero_field_keeps_state() {
        let sys = OdeSystem::new(2, |_| vec![0.0, 0.0]);
        let sol = mgi_step(&sys, &[0.25, -4.0], 1.0, 0.5, 3, 16, &NewtonConfig::default()).unwrap();
        assert_eq!(sol.end_state(), vec![0.25, -4.0]);
    }

    #[test]
    fn domain_violation_is_reported() {
        let sys = OdeSystem::new(1, |y| vec![-1.0 / y[0]]).with_domain(|y| {
            if y[0] > 0.0 {
                Ok(())
            } else {
                Err("y must stay positive".into())
            }
        });
        let err = mci_step(&sys, &[0.1], 0.0, 5.0, 2, &NewtonConfig::default()).unwrap_err();
        assert!(
            matches!(err, Error::Domain { .. } | Error::NonConvergence { .. } | Error::Singular { .. }),
            "{err:?}"
        );
        let err = mci_step(&sys, &[-1.0], 0.0, 0.1, 2, &NewtonConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn q_rhs_below_order_rejected() {
        assert!(MimeticStepper::new(Scheme::Galerkin { q_rhs: 2 }, 3).is_err());
    }

    #[test]
    fn extrapolated_guess_gives_same_answer() {
        let sys = OdeSystem::new(2, |y| vec![y[1], -10.0 * y[0].sin()])
            .with_jacobian(|y| Matrix::from_rows(&[vec![0.0, 1.0], vec![-10.0 * y[0].cos(), 0.0]]));
        let st = MimeticStepper::new(Scheme::Canonical, 2).unwrap();
        let cfg = NewtonConfig::default();
        let first = st.step(&sys, &[1.0, 0.0], 0.0, 0.2, &cfg, None).unwrap();
        let y1 = first.solution.end_state();
        let a = st.step(&sys, &y1, 0.2, 0.2, &cfg, None).unwrap();
        let b = st.step(&sys, &y1, 0.2, 0.2, &cfg, Some(&first.solution)).unwrap();
        assert!(b.iterations <= a.iterations);
        for (x, y) in a.solution.end_state().iter().zip(b.solution.end_state()) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
    }
}
