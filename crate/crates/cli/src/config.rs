use std::fs;
use std::path::{Path, PathBuf};

use geodesy::integrators::{InitialGuess, JacobianMode};
use geodesy::{problem_by_name, IntegrateOptions, Method, NewtonConfig, ProblemSpec};
use serde::{Deserialize, Serialize};

use crate::{usage, UsageError};

/// Settings of one experiment. Unset fields fall back to the problem's
/// reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    pub method: String,
    pub pt: usize,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub initial_state: Option<Vec<f64>>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub finite_difference: bool,
    pub extrapolate: bool,
    pub q_rhs: Option<usize>,
    pub out: PathBuf,
    /// Points written per element; 1 writes the step endpoints only.
    pub samples: usize,
    pub dts: Option<Vec<f64>>,
    pub halvings: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: "circle".into(),
            method: "mci".into(),
            pt: 2,
            dt: None,
            t_final: None,
            initial_state: None,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            finite_difference: false,
            extrapolate: false,
            q_rhs: None,
            out: PathBuf::from("."),
            samples: 1,
            dts: None,
            halvings: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())).into())
    }

    /// Checks the settings and looks up the problem and method.
    pub fn resolve(&self) -> anyhow::Result<Resolved> {
        let spec = problem_by_name(&self.problem).map_err(|e| UsageError(e.to_string()))?;
        let method: Method = self.method.parse().map_err(|e: geodesy::Error| UsageError(e.to_string()))?;
        let dt = self.dt.unwrap_or(spec.reference_dt);
        let t_final = self.t_final.unwrap_or(spec.reference_t_final);
        positive("dt", dt)?;
        positive("t_final", t_final)?;
        positive("newton_tol", self.newton_tol)?;
        if self.pt == 0 || self.newton_max_iter == 0 || self.samples == 0 {
            return usage("pt, newton_max_iter and samples must be positive");
        }
        if let Some(q) = self.q_rhs {
            if q < self.pt {
                return usage(format!("q_rhs = {q} must be at least pt = {}", self.pt));
            }
        }
        if self.samples > 1 && !method.is_mimetic() {
            return usage(format!("samples > 1 needs a mimetic method, got {method}"));
        }
        let y0 = match &self.initial_state {
            Some(y) if y.len() != spec.system.dimension() => {
                return usage(format!(
                    "initial_state has {} components, {} needs {}",
                    y.len(),
                    spec.name,
                    spec.system.dimension()
                ))
            }
            Some(y) => y.clone(),
            None => spec.initial_state.clone(),
        };
        let opts = IntegrateOptions {
            order: self.pt,
            q_rhs: self.q_rhs,
            newton: NewtonConfig {
                abs_tol: self.newton_tol,
                max_iter: self.newton_max_iter,
                jacobian_mode: if self.finite_difference {
                    JacobianMode::ForwardDifference
                } else {
                    JacobianMode::Analytic
                },
                ..NewtonConfig::default()
            },
            initial_guess: if self.extrapolate {
                InitialGuess::Extrapolate
            } else {
                InitialGuess::Constant
            },
        };
        Ok(Resolved {
            spec,
            method,
            opts,
            dt,
            t_final,
            y0,
            out: self.out.clone(),
            samples: self.samples,
        })
    }

    /// Step sizes of a convergence study, largest first.
    pub fn step_sizes(&self, base_dt: f64) -> anyhow::Result<Vec<f64>> {
        let mut dts = match (&self.dts, self.halvings) {
            (Some(_), Some(_)) => return usage("give either dts or halvings, not both"),
            (Some(d), None) => d.clone(),
            (None, h) => (0..=h.unwrap_or(3)).map(|k| base_dt / 2f64.powi(k as i32)).collect(),
        };
        if dts.len() < 3 {
            return usage(format!("a convergence study needs at least 3 step sizes, got {}", dts.len()));
        }
        for &d in &dts {
            positive("dt", d)?;
        }
        dts.sort_by(|a, b| b.total_cmp(a));
        if dts.windows(2).any(|w| w[0] == w[1]) {
            return usage("step sizes must be distinct");
        }
        Ok(dts)
    }
}

fn positive(name: &str, v: f64) -> anyhow::Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        usage(format!("{name} must be positive, got {v}"))
    }
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: ProblemSpec,
    pub method: Method,
    pub opts: IntegrateOptions,
    pub dt: f64,
    pub t_final: f64,
    pub y0: Vec<f64>,
    pub out: PathBuf,
    pub samples: usize,
}
