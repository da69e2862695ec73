use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geodesy_cli::commands::{self, CONVERGENCE_CSV};
use geodesy_cli::config::RunConfig;
use geodesy_cli::exit_code;

#[derive(Parser)]
#[command(name = "geodesy", version, about = "Mimetic spectral-element time integration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one problem and write trajectory.csv and invariants.csv.
    Run(Opts),
    /// Step-size study written to convergence.csv.
    Converge(Opts),
    /// Print the Butcher tableau of the canonical integrator of order --pt.
    Tableau(Opts),
    /// Write a gnuplot script for the CSV files in --out.
    Plot(Opts),
    /// List the available problems and methods.
    List,
}

#[derive(Args, Default)]
struct Opts {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    pt: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long)]
    qrhs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated step sizes for `converge`.
    #[arg(long, value_delimiter = ',')]
    dts: Option<Vec<f64>>,
    /// Number of halvings of --dt for `converge`.
    #[arg(long)]
    halvings: Option<usize>,
    /// Points written per element (mimetic methods).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    newton_tol: Option<f64>,
    #[arg(long)]
    newton_max_iter: Option<usize>,
    /// Initial state override, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y0: Option<Vec<f64>>,
    /// Use forward differences for the stage Jacobian.
    #[arg(long)]
    fd: bool,
    /// Extrapolate the previous element as the Newton initial guess.
    #[arg(long)]
    extrapolate: bool,
}

impl Opts {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = &self.$flag { c.$field = v.clone(); })*
            };
        }
        set!(problem => problem, method => method, pt => pt, out => out, samples => samples,
             newton_tol => newton_tol, newton_max_iter => newton_max_iter);
        macro_rules! set_opt {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = &self.$flag { c.$field = Some(v.clone()); })*
            };
        }
        set_opt!(dt => dt, tfinal => t_final, qrhs => q_rhs, dts => dts, halvings => halvings, y0 => initial_state);
        c.finite_difference |= self.fd;
        c.extrapolate |= self.extrapolate;
        Ok(c)
    }
}

fn execute(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Run(o) => {
            let r = o.config()?.resolve()?;
            let s = commands::run(&r)?;
            println!("{} {}{} dt={} steps={}", r.spec.name, r.method, order_suffix(&r), r.dt, s.steps);
            for (label, err) in &s.max_errors {
                println!("max |{label} error| = {err:.6e}");
            }
            for f in &s.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Converge(o) => {
            let cfg = o.config()?;
            let r = cfg.resolve()?;
            let study = commands::converge(&cfg, &r)?;
            let path = r.out.join(CONVERGENCE_CSV);
            commands::convergence_csv(&study).write(&path)?;
            println!("{} {}{} against {}", r.spec.name, r.method, order_suffix(&r), study.reference);
            println!("fitted order {:.4}", study.fitted_order);
            println!("wrote {}", path.display());
        }
        Command::Tableau(o) => {
            let cfg = o.config()?;
            print!("{}", commands::tableau(cfg.pt)?);
        }
        Command::Plot(o) => {
            let cfg = o.config()?;
            let path = commands::emit_plot_script(&cfg.out)?;
            println!("wrote {}", path.display());
        }
        Command::List => print!("{}", commands::list()),
    }
    Ok(())
}

fn order_suffix(r: &geodesy_cli::config::Resolved) -> String {
    if r.method.is_mimetic() {
        r.opts.order.to_string()
    } else {
        String::new()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
