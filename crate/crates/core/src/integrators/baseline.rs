//! Explicit reference schemes used as baselines in the experiments.

use crate::error::{Error, Result};

use super::system::OdeSystem;

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

/// `y + dt · h(y)`.
pub fn explicit_euler_step(sys: &OdeSystem, y0: &[f64], t0: f64, dt: f64) -> Result<Vec<f64>> {
    let h = sys.eval_checked(y0, || format!("explicit Euler stage (t = {t0})"))?;
    Ok(axpy(y0, dt, &h))
}

/// Momentum first: `p⁺ = p + dt·f(q)`, then `q⁺ = q + dt·g(p⁺)`.
pub fn symplectic_euler_step(sys: &OdeSystem, y0: &[f64], t0: f64, dt: f64) -> Result<Vec<f64>> {
    let part = sys.partition().ok_or(Error::NoPartition {
        method: "symplectic Euler",
    })?;
    sys.check_domain(y0, || format!("symplectic Euler stage (t = {t0})"))?;
    let q: Vec<f64> = part.position.iter().map(|&i| y0[i]).collect();
    let f = (part.force)(&q);
    let mut y = y0.to_vec();
    for (&i, fi) in part.momentum.iter().zip(&f) {
        y[i] += dt * fi;
    }
    let p_new: Vec<f64> = part.momentum.iter().map(|&i| y[i]).collect();
    let g = (part.velocity)(&p_new);
    for (&i, gi) in part.position.iter().zip(&g) {
        y[i] += dt * gi;
    }
    sys.check_domain(&y, || format!("symplectic Euler result (t = {})", t0 + dt))?;
    Ok(y)
}

/// Classic four-stage Runge-Kutta.
pub fn rk4_step(sys: &OdeSystem, y0: &[f64], t0: f64, dt: f64) -> Result<Vec<f64>> {
    let loc = |s: usize| move || format!("RK4 stage {s} (t = {t0})");
    let k1 = sys.eval_checked(y0, loc(1))?;
    let k2 = sys.eval_checked(&axpy(y0, 0.5 * dt, &k1), loc(2))?;
    let k3 = sys.eval_checked(&axpy(y0, 0.5 * dt, &k2), loc(3))?;
    let k4 = sys.eval_checked(&axpy(y0, dt, &k3), loc(4))?;
    Ok((0..y0.len())
        .map(|i| y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}
