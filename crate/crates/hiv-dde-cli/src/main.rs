//! Command-line front end: scenario simulation, analysis, onset scan, and
//! parameter sweeps over the delayed in-host infection model.
//!
//! Exit codes: 0 success, 1 usage error, 2 computation error.

mod config;
mod pipeline;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hiv_dde::dde_sim::{self, SimConfig};
use hiv_dde::model::Parameters;
use hiv_dde::scenario::{self, Expected};

use config::OutputsConfig;

#[derive(Parser)]
#[command(name = "hiv-dde", version, about = "Delayed in-host infection model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Either a named built-in scenario or a TOML config file, plus overrides.
#[derive(Args)]
struct Selection {
    /// Built-in scenario name (see `simulate --scenario list`).
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Path to a TOML config file with [params], [sim], [outputs] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the immune-response delay tau3.
    #[arg(long)]
    tau3: Option<f64>,
    /// Override the simulation horizon.
    #[arg(long = "t-end")]
    t_end: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full scenario: analysis, simulation, CSV/SVG/report outputs.
    Simulate {
        #[command(flatten)]
        selection: Selection,
        /// Output directory (default: current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Analysis only: reproduction numbers, equilibria, stability, Hopf data.
    Analyze {
        #[command(flatten)]
        selection: Selection,
    },
    /// Bisect on tau3 for the onset of sustained oscillation.
    Scan {
        #[command(flatten)]
        selection: Selection,
        /// Lower delay bound (long-term behavior must be convergent here).
        #[arg(long)]
        lo: f64,
        /// Upper delay bound (long-term behavior must be oscillatory here).
        #[arg(long)]
        hi: f64,
        /// Bracket-width tolerance.
        #[arg(long, default_value_t = 0.5)]
        tol: f64,
    },
    /// Re-run the analysis across several values of one parameter.
    Sweep {
        #[command(flatten)]
        selection: Selection,
        /// Parameter name (e.g. tau3, beta1, c).
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values; an empty list yields an empty
        /// table.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        /// Also simulate each row and report the long-term verdict.
        #[arg(long)]
        simulate: bool,
    },
}

/// Marker for argument-level mistakes so `main` can exit 1 instead of 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for UsageError {}

macro_rules! usage_bail {
    ($($arg:tt)*) => {
        return Err(anyhow::Error::new(UsageError(format!($($arg)*))))
    };
}

struct Resolved {
    label: String,
    params: Parameters,
    sim: SimConfig,
    outputs: OutputsConfig,
    expected: Option<Expected>,
}

fn resolve(sel: &Selection) -> Result<Resolved> {
    let mut resolved = match (&sel.scenario, &sel.config) {
        (Some(name), None) => {
            let Some(sc) = scenario::by_name(name) else {
                usage_bail!(
                    "unknown scenario {name:?}; available: {}",
                    scenario::registry()
                        .iter()
                        .map(|s| s.name)
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            };
            Resolved {
                label: sc.name.to_string(),
                params: sc.params,
                sim: SimConfig::with_defaults(&sc.params, sc.history, sc.t_end),
                outputs: OutputsConfig::default(),
                expected: Some(sc.expected),
            }
        }
        (None, Some(path)) => {
            let (params, sim, outputs) = match config::load_config(path) {
                Ok(loaded) => loaded,
                Err(e) => usage_bail!("{e:#}"),
            };
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "config".into());
            Resolved {
                label,
                params,
                sim,
                outputs,
                expected: None,
            }
        }
        _ => usage_bail!("exactly one of --scenario or --config is required"),
    };
    if let Some(tau3) = sel.tau3 {
        resolved.params.tau3 = tau3;
    }
    if let Some(t_end) = sel.t_end {
        resolved.sim.t_end = t_end;
    }
    // Re-derive the step after overrides so it still respects every delay.
    let dt = match resolved.params.min_positive_delay() {
        Some(tau) => resolved.sim.dt.min(tau),
        None => resolved.sim.dt,
    };
    resolved.sim.dt = dt;
    let report = resolved.params.validate();
    if !report.violations.is_empty() {
        usage_bail!("invalid parameters: {}", report.violations.join("; "));
    }
    if let Err(e) = resolved.sim.validate(&resolved.params) {
        usage_bail!("invalid simulation settings: {e}");
    }
    Ok(resolved)
}

fn set_param(params: &mut Parameters, name: &str, value: f64) -> Result<()> {
    let slot = match name {
        "lambda" => &mut params.lambda,
        "beta1" => &mut params.beta1,
        "beta2" => &mut params.beta2,
        "rho" => &mut params.rho,
        "m1" => &mut params.m1,
        "m2" => &mut params.m2,
        "alpha" => &mut params.alpha,
        "a" => &mut params.a,
        "k" => &mut params.k,
        "c" => &mut params.c,
        "h" => &mut params.h,
        "eta" => &mut params.eta,
        "mu1" => &mut params.mu1,
        "mu2" => &mut params.mu2,
        "mu3" => &mut params.mu3,
        "mu4" => &mut params.mu4,
        "mu5" => &mut params.mu5,
        "tau1" => &mut params.tau1,
        "tau2" => &mut params.tau2,
        "tau3" => &mut params.tau3,
        other => usage_bail!("unknown parameter {other:?}"),
    };
    *slot = value;
    Ok(())
}

fn run_command(command: Command) -> Result<()> {
    match command {
        Command::Simulate { selection, out } => {
            let r = resolve(&selection)?;
            let report = pipeline::run(
                &r.label,
                &r.params,
                &r.sim,
                r.expected.as_ref(),
                &r.outputs,
                &out,
            )?;
            print!("{}", pipeline::render(&report));
            println!("# outputs written to {}", out.display());
        }
        Command::Analyze { selection } => {
            let r = resolve(&selection)?;
            let report = pipeline::analyze(&r.label, &r.params, r.expected.as_ref())?;
            print!("{}", pipeline::render(&report));
        }
        Command::Scan {
            selection,
            lo,
            hi,
            tol,
        } => {
            let r = resolve(&selection)?;
            if !(lo < hi && tol > 0.0) {
                usage_bail!(
                    "scan requires lo < hi and tol > 0 (got lo = {lo}, hi = {hi}, tol = {tol})"
                );
            }
            let (blo, bhi) = dde_sim::bifurcation_scan(&r.params, lo, hi, &r.sim, tol)
                .context("onset scan")?;
            println!("[scan]");
            println!("bracket = [{blo:.6}, {bhi:.6}]  # dde_sim::bifurcation_scan");
            if r.params.tau1 == 0.0 && r.params.tau2 == 0.0 {
                match hiv_dde::charstab::critical_tau0(&r.params) {
                    Ok(Some(crit)) => {
                        let mid = 0.5 * (blo + bhi);
                        let gap = (mid - crit.tau0).abs() / crit.tau0;
                        println!("tau0_analytic = {:.6}  # charstab::critical_tau0", crit.tau0);
                        println!("relative_gap = {gap:.4}  # |bracket midpoint - tau0| / tau0");
                    }
                    Ok(None) => {
                        println!("tau0_analytic = \"no crossing frequency\"");
                    }
                    Err(e) => println!("tau0_analytic = \"unavailable: {e}\""),
                }
            } else {
                println!("tau0_analytic = \"analytic tau0 unavailable: tau1, tau2 > 0\"");
            }
        }
        Command::Sweep {
            selection,
            param,
            values,
            simulate,
        } => {
            let r = resolve(&selection)?;
            if values.is_empty() {
                println!("[sweep]");
                return Ok(());
            }
            // Reject bad parameter names before spawning any work.
            set_param(&mut r.params.clone(), &param, values[0])?;
            let rows: Vec<String> = std::thread::scope(|scope| {
                let handles: Vec<_> = values
                    .iter()
                    .map(|&value| {
                        let r = &r;
                        let param = &param;
                        scope.spawn(move || -> String {
                            let mut params = r.params;
                            if let Err(e) = set_param(&mut params, param, value) {
                                return format!("{param} = {value}: error: {e}");
                            }
                            let report = params.validate();
                            if !report.violations.is_empty() {
                                return format!(
                                    "{param} = {value}: error: {}",
                                    report.violations.join("; ")
                                );
                            }
                            let mut sim = r.sim;
                            if let Some(tau) = params.min_positive_delay() {
                                sim.dt = sim.dt.min(tau);
                            }
                            match pipeline::analyze(&r.label, &params, None) {
                                Ok(mut rep) => {
                                    if simulate {
                                        match dde_sim::simulate(&params, &sim)
                                            .map(|traj| dde_sim::classify(&traj, &sim))
                                        {
                                            Ok(v) => rep.verdict = Some(v),
                                            Err(e) => {
                                                return format!("{param} = {value}: error: {e}")
                                            }
                                        }
                                    }
                                    format!("{param} = {value}: {}", pipeline::summary_row(&rep))
                                }
                                Err(e) => format!("{param} = {value}: error: {e}"),
                            }
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| "error: worker panicked".into()))
                    .collect()
            });
            println!("[sweep]");
            for row in rows {
                println!("{row}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Version/help requests are successes; anything else is misuse.
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run_command(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<UsageError>().is_some() { 1 } else { 2 };
            ExitCode::from(code)
        }
    }
}
