use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use darcy_da_core::harness::sweep::sweep_table;
use darcy_da_core::harness::verify::verify;
use darcy_da_core::harness::{load_config, run_twin_experiment, sweep, ErrorSeries, SweepAxis};
use darcy_da_core::{Interpolant, InterpolantKind};

/// Worker threads for sweeps and member stepping; defaults to all cores.
const THREADS_ENV: &str = "DARCY_DA_THREADS";

#[derive(Parser)]
#[command(name = "darcy-da", version, about = "Nudging data assimilation twin experiments for Darcy-Benard convection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one twin experiment.
    Run {
        config: PathBuf,
        /// Error-series CSV path, overriding `output` in the config.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one twin experiment per value along a parameter axis.
    Sweep {
        config: PathBuf,
        /// One of mu, h, noise_level, Ra.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma separated, ascending.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Base CSV path; member files get `_<axis>_<value>` appended to the stem.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the discretization property checks on the config's grid.
    Verify { config: PathBuf },
    /// Estimate the interpolant approximation constant on the config's grid.
    EstimateC0 {
        config: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("{THREADS_ENV}={raw} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot build thread pool: {e}"))
}

fn summarize(label: &str, s: &ErrorSeries) {
    let last = s.rows.last();
    println!(
        "{label}: t_end {} final xi_l2 {} rate {} conditions mu {} h {}",
        last.map_or("-".into(), |r| format!("{}", r.t)),
        s.final_error().map_or("-".into(), |e| format!("{e:.6e}")),
        s.meta.fitted_rate.map_or("none".into(), |r| format!("{r:.6}")),
        s.meta.mu_condition,
        s.meta.h_condition,
    );
    for w in &s.meta.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(f) = &s.meta.failure {
        eprintln!("{label} failed: {f}");
    }
}

fn execute(command: Command) -> darcy_da_core::Result<bool> {
    match command {
        Command::Run { config, output } => {
            let mut cfg = load_config(&config)?;
            if output.is_some() {
                cfg.output = output;
            }
            let s = run_twin_experiment(&cfg)?;
            summarize("run", &s);
            if cfg.output.is_none() {
                print!("{}", s.to_csv());
            }
            Ok(!s.failed())
        }
        Command::Sweep { config, axis, values, output } => {
            let mut cfg = load_config(&config)?;
            if output.is_some() {
                cfg.output = output;
            }
            let rows = sweep(&cfg, axis, &values)?;
            print!("{}", sweep_table(axis, &rows));
            for r in rows.iter().filter(|r| r.failed()) {
                eprintln!("{} = {:?} failed: {}", axis.name(), r.value, r.series.meta.failure.as_deref().unwrap_or("?"));
            }
            Ok(rows.iter().all(|r| !r.failed()))
        }
        Command::Verify { config } => {
            let checks = verify(&load_config(&config)?)?;
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Command::EstimateC0 { config, trials, seed } => {
            let cfg = load_config(&config)?;
            let interp = Interpolant::new(cfg.interpolant, cfg.grid()?, cfg.h)?;
            let trials = trials.unwrap_or(cfg.c0_trials);
            let seed = seed.unwrap_or(cfg.c0_seed);
            if cfg.interpolant == InterpolantKind::Nodal {
                let (c1, c2) = interp.estimate_c1_c2(trials, seed)?;
                println!("c1 = {c1:.6}\nc2 = {c2:.6}");
            } else {
                println!("c0 = {:.6}", interp.estimate_c0(trials, seed)?);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
