//! Runge-Kutta form of the canonical integrator.
//!
//! With `A_{j,l} = e_l(τ̃ʲ)` and stage derivatives `k_j = dy/dt(τ̃ʲ)`, the
//! edge differences are `Δy = √g A⁻¹ k`; cumulative sums give the GLL node
//! values `y^i - y^0`. Dividing by `Δt = 2√g` yields `G = ½ L A⁻¹` with `L`
//! the lower-triangular matrix of ones. The last row of `G` is `b`; the
//! stage matrix is `G` interpolated from the GLL nodes to the Gauss nodes.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mimetic::ReferenceElement;
use crate::spectral::gauss_rule;

use super::newton::max_norm;
use super::system::OdeSystem;

pub const MAX_TABLEAU_ORDER: usize = 16;
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Largest entrywise difference against another tableau of equal size.
    pub fn max_deviation(&self, other: &ButcherTableau) -> f64 {
        assert_eq!(self.stages(), other.stages());
        let s = self.stages();
        let mut dev: f64 = 0.0;
        for i in 0..s {
            for j in 0..s {
                dev = dev.max((self.a[(i, j)] - other.a[(i, j)]).abs());
            }
            dev = dev.max((self.b[i] - other.b[i]).abs());
            dev = dev.max((self.c[i] - other.c[i]).abs());
        }
        dev
    }

    /// Checks `Σ b = 1`, `c` increasing in (0, 1), and row sums of `A` equal `c`.
    pub fn check_invariants(&self) -> Result<()> {
        let sum_b: f64 = self.b.iter().sum();
        if (sum_b - 1.0).abs() > 1e-13 {
            return Err(Error::InvalidArgument(format!("tableau weights sum to {sum_b}")));
        }
        if self.c.iter().any(|&c| !(c > 0.0 && c < 1.0)) || self.c.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("tableau nodes not increasing in (0, 1)".into()));
        }
        for i in 0..self.stages() {
            let row: f64 = self.a.row(i).iter().sum();
            if (row - self.c[i]).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "row {i} of A sums to {row}, expected {}",
                    self.c[i]
                )));
            }
        }
        Ok(())
    }
}

fn check_tableau_order(p: usize) -> Result<()> {
    if !(1..=MAX_TABLEAU_ORDER).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "tableau order must be in 1..={MAX_TABLEAU_ORDER}, got {p}"
        )));
    }
    Ok(())
}

/// Tableau of the canonical integrator of order `p`.
pub fn butcher_tableau_mci(p: usize) -> Result<ButcherTableau> {
    check_tableau_order(p)?;
    let reference = ReferenceElement::new(p)?;
    let edge = reference.edge_at_dual();
    let inv = edge.inverse()?;
    let cond = edge.norm1() * inv.norm1();
    if cond > MAX_CONDITION {
        return Err(Error::IllConditioned(cond));
    }
    // g[i] holds (y^{i+1} - y^0) / Δt per unit stage derivative.
    let mut g = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            g[(i, j)] = 0.5 * (0..=i).map(|l| inv[(l, j)]).sum::<f64>();
        }
    }
    let b = g.row(p - 1).to_vec();
    let nodal = reference.nodal_at_dual();
    let mut a = Matrix::zeros(p, p);
    for s in 0..p {
        for j in 0..p {
            // Column k = 0 contributes y^0, which carries no stage weight.
            a[(s, j)] = (1..=p).map(|k| nodal[(s, k)] * g[(k - 1, j)]).sum();
        }
    }
    let c = reference.dual_nodes().iter().map(|x| 0.5 * (x + 1.0)).collect();
    let tableau = ButcherTableau { a, b, c };
    tableau.check_invariants()?;
    Ok(tableau)
}

fn poly_mul_linear(coeffs: &[f64], root: f64, scale: f64) -> Vec<f64> {
    // (Σ a_k s^k) · (s - root) / scale
    let mut out = vec![0.0; coeffs.len() + 1];
    for (k, &a) in coeffs.iter().enumerate() {
        out[k + 1] += a / scale;
        out[k] -= a * root / scale;
    }
    out
}

fn poly_integral(coeffs: &[f64], upper: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| a * upper.powi(k as i32 + 1) / (k as f64 + 1.0))
        .sum()
}

/// `s`-stage Gauss collocation tableau built from monomial expansions of the
/// Lagrange polynomials on the shifted Gauss nodes:
/// `a_ij = ∫₀^{c_i} ℓ_j`, `b_j = ∫₀¹ ℓ_j`.
pub fn gauss_collocation_tableau(s: usize) -> Result<ButcherTableau> {
    check_tableau_order(s)?;
    let c: Vec<f64> = gauss_rule(s)?.nodes().iter().map(|x| 0.5 * (x + 1.0)).collect();
    let lagrange: Vec<Vec<f64>> = (0..s)
        .map(|j| {
            (0..s)
                .filter(|&k| k != j)
                .fold(vec![1.0], |acc, k| poly_mul_linear(&acc, c[k], c[j] - c[k]))
        })
        .collect();
    let mut a = Matrix::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            a[(i, j)] = poly_integral(&lagrange[j], c[i]);
        }
    }
    let b = lagrange.iter().map(|l| poly_integral(l, 1.0)).collect();
    Ok(ButcherTableau { a, b, c })
}

/// One implicit Runge-Kutta step solved by fixed-point iteration on the
/// stage derivatives.
pub fn irk_fixed_point_step(
    sys: &OdeSystem,
    tableau: &ButcherTableau,
    y0: &[f64],
    dt: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let s = tableau.stages();
    let m = y0.len();
    let h0 = sys.eval_checked(y0, || "IRK initial state".into())?;
    let mut k: Vec<Vec<f64>> = vec![h0; s];
    let stage_state = |k: &[Vec<f64>], i: usize| -> Vec<f64> {
        (0..m)
            .map(|c| y0[c] + dt * (0..s).map(|j| tableau.a[(i, j)] * k[j][c]).sum::<f64>())
            .collect()
    };
    let mut converged = false;
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let mut next = Vec::with_capacity(s);
        for i in 0..s {
            next.push(sys.eval_checked(&stage_state(&k, i), || format!("IRK stage {i}"))?);
        }
        change = next
            .iter()
            .zip(&k)
            .map(|(a, b)| max_norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>()))
            .fold(0.0, f64::max);
        k = next;
        if change <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations: max_iter,
            residual_norm: change,
            last_iterate: k.concat(),
        });
    }
    Ok((0..m)
        .map(|c| y0[c] + dt * (0..s).map(|i| tableau.b[i] * k[i][c]).sum::<f64>())
        .collect())
}
