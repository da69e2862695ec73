use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use geodesy::integrators::MAX_TABLEAU_ORDER;
use geodesy::problems::all_problems;
use geodesy::{butcher_tableau_mci, gauss_collocation_tableau, integrate, Method, Trajectory};
use rayon::prelude::*;

use crate::config::{Resolved, RunConfig};
use crate::output::{num, Csv};
use crate::usage;

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const INVARIANTS_CSV: &str = "invariants.csv";
pub const CONVERGENCE_CSV: &str = "convergence.csv";
pub const PLOT_SCRIPT: &str = "plot.gp";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub max_errors: Vec<(String, f64)>,
    pub files: Vec<PathBuf>,
}

fn integrate_resolved(r: &Resolved, dt: f64) -> geodesy::Result<Trajectory> {
    integrate(&r.spec.system, r.method, &r.y0, 0.0, r.t_final, dt, &r.opts)
}

pub fn trajectory_csv(traj: &Trajectory, samples: usize) -> Csv {
    let m = traj.final_state().len();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=m).map(|i| format!("y_{i}")))
        .collect();
    let mut csv = Csv::new(&header);
    let row = |t: f64, y: &[f64]| [&[t][..], y].concat();
    csv.push(&row(traj.times()[0], &traj.states()[0]));
    if samples > 1 {
        for el in traj.elements() {
            for k in 1..=samples {
                let tau = -1.0 + 2.0 * k as f64 / samples as f64;
                csv.push(&row(el.grid().time_of(tau), &el.eval(tau)));
            }
        }
    } else {
        for (t, y) in traj.times().iter().zip(traj.states()).skip(1) {
            csv.push(&row(*t, y));
        }
    }
    csv
}

pub fn invariants_csv(traj: &Trajectory) -> Csv {
    let labels = traj.invariant_labels();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(labels.iter().map(|l| format!("{l}_error")))
        .collect();
    let mut csv = Csv::new(&header);
    let errors: Vec<Vec<f64>> = labels.iter().map(|l| traj.invariant_error(l).unwrap()).collect();
    for (n, t) in traj.times().iter().enumerate() {
        let row: Vec<f64> = std::iter::once(*t).chain(errors.iter().map(|e| e[n])).collect();
        csv.push(&row);
    }
    csv
}

/// Integrates once and writes the trajectory and invariant-error series.
pub fn run(r: &Resolved) -> anyhow::Result<RunSummary> {
    let traj = integrate_resolved(r, r.dt)?;
    let paths = [r.out.join(TRAJECTORY_CSV), r.out.join(INVARIANTS_CSV)];
    trajectory_csv(&traj, r.samples).write(&paths[0])?;
    invariants_csv(&traj).write(&paths[1])?;
    Ok(RunSummary {
        steps: traj.steps(),
        max_errors: traj
            .invariant_labels()
            .iter()
            .map(|l| (l.clone(), traj.max_invariant_error(l).unwrap()))
            .collect(),
        files: paths.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub endpoint_error: f64,
    pub invariant_error: f64,
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub reference: String,
    pub fitted_order: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Least-squares slope of `ln err` against `ln dt`, skipping zero errors.
pub fn fitted_order(dts: &[f64], errs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = dts
        .iter()
        .zip(errs)
        .filter(|(_, e)| **e > 0.0 && e.is_finite())
        .map(|(d, e)| (d.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Endpoint and invariant errors over a set of step sizes. Without an exact
/// solution the endpoint is compared with a run at the smallest step over 64,
/// using order `p_t + 2` for the mimetic methods.
pub fn converge(cfg: &RunConfig, r: &Resolved) -> anyhow::Result<ConvergenceStudy> {
    let dts = cfg.step_sizes(r.dt)?;
    let sys = &r.spec.system;
    let (target, reference) = match sys.exact_solution(r.t_final, &r.y0) {
        Some(y) => (y, "exact solution".to_string()),
        None => {
            let dt_ref = dts[dts.len() - 1] / 64.0;
            let mut opts = r.opts;
            if r.method.is_mimetic() {
                opts.order += 2;
                opts.q_rhs = r.opts.q_rhs.map(|q| q + 4);
            }
            let traj = integrate(sys, r.method, &r.y0, 0.0, r.t_final, dt_ref, &opts)
                .context("reference run failed")?;
            let what = if r.method.is_mimetic() {
                format!("{}{} at dt = {dt_ref:e}", r.method, opts.order)
            } else {
                format!("{} at dt = {dt_ref:e}", r.method)
            };
            (traj.final_state().to_vec(), what)
        }
    };

    let results: Vec<(f64, f64)> = dts
        .par_iter()
        .map(|&dt| {
            let traj = integrate_resolved(r, dt).with_context(|| format!("run with dt = {dt} failed"))?;
            let inv = traj
                .invariant_labels()
                .iter()
                .map(|l| traj.max_invariant_error(l).unwrap())
                .fold(0.0, f64::max);
            Ok((distance(traj.final_state(), &target), inv))
        })
        .collect::<anyhow::Result<_>>()?;

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(dts.len());
    for (i, (&dt, &(e, inv))) in dts.iter().zip(&results).enumerate() {
        let observed_order = (i > 0).then(|| {
            let prev = &rows[i - 1];
            (prev.endpoint_error / e).ln() / (prev.dt / dt).ln()
        });
        rows.push(ConvergenceRow {
            dt,
            endpoint_error: e,
            invariant_error: inv,
            observed_order,
        });
    }
    let errs: Vec<f64> = results.iter().map(|r| r.0).collect();
    Ok(ConvergenceStudy {
        fitted_order: fitted_order(&dts, &errs),
        rows,
        reference,
    })
}

pub fn convergence_csv(study: &ConvergenceStudy) -> Csv {
    let mut csv = Csv::new(&["dt", "endpoint_error", "invariant_error", "observed_order"]);
    for row in &study.rows {
        csv.push_fields(&[
            num(row.dt),
            num(row.endpoint_error),
            num(row.invariant_error),
            row.observed_order.map(num).unwrap_or_default(),
        ]);
    }
    csv
}

/// Text dump of the canonical integrator's tableau with its deviation from
/// Gauss collocation.
pub fn tableau(p: usize) -> anyhow::Result<String> {
    if !(1..=MAX_TABLEAU_ORDER).contains(&p) {
        return usage(format!("tableau order must be in 1..={MAX_TABLEAU_ORDER}, got {p}"));
    }
    let t = butcher_tableau_mci(p)?;
    let dev = t.max_deviation(&gauss_collocation_tableau(p)?);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:>22.14e}")).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    writeln!(s, "stages: {p}")?;
    writeln!(s, "A:")?;
    for i in 0..p {
        writeln!(s, "{}", fmt(t.a.row(i)))?;
    }
    writeln!(s, "b:\n{}", fmt(&t.b))?;
    writeln!(s, "c:\n{}", fmt(&t.c))?;
    writeln!(s, "max deviation from Gauss collocation: {dev:.3e}")?;
    Ok(s)
}

fn header_of(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| anyhow!("missing input file {}: {e}", path.display()))?;
    let first = text.lines().next().ok_or_else(|| anyhow!("empty file {}", path.display()))?;
    Ok(first.split(',').map(str::to_string).collect())
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Gnuplot script for the outputs in `dir`: a phase portrait, the invariant
/// drift on a log scale and, when present, the convergence study.
pub fn plot_script(dir: &Path) -> anyhow::Result<String> {
    let traj = header_of(&dir.join(TRAJECTORY_CSV))?;
    let inv = header_of(&dir.join(INVARIANTS_CSV))?;
    let conv = dir.join(CONVERGENCE_CSV);
    let conv = conv.exists().then_some(conv);
    let dimension = traj.len() - 1;
    // Four-component states hold (p₁, p₂, q₁, q₂): plot the positions.
    let (cx, cy) = if dimension == 4 { (4, 5) } else { (2, 3) };
    let panels = if conv.is_some() { 3 } else { 2 };

    let mut s = String::new();
    writeln!(s, "# run from the output directory: gnuplot {PLOT_SCRIPT}")?;
    writeln!(s, "set datafile separator ','")?;
    writeln!(s, "set key autotitle columnhead")?;
    writeln!(s, "set terminal svg size {},420", 440 * panels)?;
    writeln!(s, "set output 'plot.svg'")?;
    writeln!(s, "set multiplot layout 1,{panels}")?;

    writeln!(s, "set title 'phase space'")?;
    writeln!(s, "set xlabel {}", quote(&traj[cx - 1]))?;
    writeln!(s, "set ylabel {}", quote(&traj[cy - 1]))?;
    writeln!(s, "set size ratio -1")?;
    writeln!(s, "plot {} using {cx}:{cy} with lines notitle", quote(TRAJECTORY_CSV))?;
    writeln!(s, "set size noratio")?;

    writeln!(s, "set title 'invariant error'")?;
    writeln!(s, "set xlabel 't'")?;
    writeln!(s, "set ylabel '|error|'")?;
    writeln!(s, "set logscale y")?;
    writeln!(s, "set format y '%.0e'")?;
    if inv.len() > 1 {
        let curves: Vec<String> = (2..=inv.len())
            .map(|k| format!("{} using 1:(abs(${k})) with lines title {}", quote(INVARIANTS_CSV), quote(&inv[k - 1])))
            .collect();
        writeln!(s, "plot {}", curves.join(", \\\n     "))?;
    }

    if conv.is_some() {
        writeln!(s, "set title 'convergence'")?;
        writeln!(s, "set xlabel 'dt'")?;
        writeln!(s, "set ylabel 'error'")?;
        writeln!(s, "set logscale xy")?;
        writeln!(
            s,
            "plot {f} using 1:2 with linespoints title 'endpoint', {f} using 1:3 with linespoints title 'invariant'",
            f = quote(CONVERGENCE_CSV)
        )?;
    }
    writeln!(s, "unset multiplot")?;
    Ok(s)
}

pub fn emit_plot_script(dir: &Path) -> anyhow::Result<PathBuf> {
    let script = plot_script(dir)?;
    let path = dir.join(PLOT_SCRIPT);
    fs::write(&path, script).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

pub fn list() -> String {
    let mut s = String::from("problems:\n");
    for p in all_problems() {
        let _ = writeln!(
            s,
            "  {:<15} M={} invariants={} dt={} t_final={}  {}",
            p.name,
            p.system.dimension(),
            p.invariant_labels().join(","),
            p.reference_dt,
            p.reference_t_final,
            p.description
        );
    }
    s.push_str("methods:\n");
    for m in Method::ALL {
        let _ = writeln!(s, "  {m}");
    }
    s
}
