use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    /// Use the analytic Jacobian when one is supplied, otherwise fall back
    /// to forward differences.
    Analytic,
    ForwardDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Convergence threshold on the residual max-norm.
    pub abs_tol: f64,
    pub max_iter: usize,
    pub jacobian_mode: JacobianMode,
    /// Forward-difference step, scaled by `1 + |x_j|`.
    pub fd_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            abs_tol: 1e-12,
            max_iter: 50,
            jacobian_mode: JacobianMode::Analytic,
            fd_step: 1e-7,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_iter == 0 || !(self.fd_step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid Newton configuration {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn fd_jacobian<R>(residual: &R, x: &[f64], r0: &[f64], step: f64) -> Result<Matrix>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut jac = Matrix::zeros(r0.len(), n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = step * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let r1 = residual(&xp)?;
        for i in 0..r0.len() {
            jac[(i, j)] = (r1[i] - r0[i]) / h;
        }
        xp[j] = x[j];
    }
    Ok(jac)
}

/// Newton-Raphson on `residual(x) = 0` with dense LU solves.
///
/// `jacobian` is used when present and `cfg.jacobian_mode` is
/// [`JacobianMode::Analytic`].
pub fn newton_solve<R, J>(
    residual: R,
    jacobian: Option<J>,
    x0: &[f64],
    cfg: &NewtonConfig,
) -> Result<NewtonOutcome>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
    J: Fn(&[f64]) -> Result<Matrix>,
{
    cfg.validate()?;
    let mut x = x0.to_vec();
    let mut r = residual(&x)?;
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("residual is not finite at the initial guess".into()));
    }
    let mut norm = max_norm(&r);
    if norm <= cfg.abs_tol {
        return Ok(NewtonOutcome {
            solution: x,
            iterations: 0,
            residual_norm: norm,
        });
    }
    let analytic = match cfg.jacobian_mode {
        JacobianMode::Analytic => jacobian.as_ref(),
        JacobianMode::ForwardDifference => None,
    };
    for iter in 1..=cfg.max_iter {
        let jac = match analytic {
            Some(j) => j(&x)?,
            None => fd_jacobian(&residual, &x, &r, cfg.fd_step)?,
        };
        let lu = Lu::factor(jac)?;
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = lu.solve(&neg);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        r = residual(&x)?;
        norm = max_norm(&r);
        if !norm.is_finite() {
            break;
        }
        if norm <= cfg.abs_tol {
            return Ok(NewtonOutcome {
                solution: x,
                iterations: iter,
                residual_norm: norm,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        residual_norm: norm,
        last_iterate: x,
    })
}
