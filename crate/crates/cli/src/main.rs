//! `uav-relay`: rate evaluation, placement sweeps and validation for a UAV
//! relay with RF access links and an FSO backhaul.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;
use uav_relay_core::placement::Parameter;
use uav_relay_core::{load_config, Axis, Objective, Range1d, ScenarioConfig, ValidationOptions};

use commands::{Context, GridSpec};

#[derive(Debug, Parser)]
#[command(name = "uav-relay", version, about)]
struct Cli {
    /// Scenario file (TOML); omitted fields take the reference defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for Monte Carlo streams.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo slots.
    #[arg(long, global = true)]
    slots: Option<u64>,

    /// Output CSV path; a `<path>.meta.json` sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Add Monte Carlo estimates (sweeps and optimization evaluate by
    /// simulation instead of closed forms).
    #[arg(long, global = true)]
    mc: bool,

    /// Sample Gamma-Gamma turbulence on the FSO hop.
    #[arg(long, global = true)]
    gg: bool,

    /// Fixed-order reduction, identical for any worker count.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    reproducible: Option<bool>,

    /// Monte Carlo worker threads.
    #[arg(long, global = true, env = "UAV_RELAY_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic rates at one UAV position, optionally with Monte Carlo.
    Rate,
    /// Rates over a placement grid or a parameter range, as CSV.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        /// Vary a scenario parameter instead of the UAV position.
        #[arg(long, value_parser = parse_enum::<Parameter>)]
        parameter: Option<Parameter>,
    },
    /// Best UAV placement for an objective.
    Optimize {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Run the acceptance suite.
    Validate {
        /// Draws per distribution test.
        #[arg(long)]
        ks_draws: Option<usize>,
        /// Random configurations for the ordering law.
        #[arg(long)]
        random_configs: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    /// altitude, x_offset or custom2d.
    #[arg(long, value_parser = parse_enum::<Axis>)]
    axis: Option<Axis>,
    #[arg(long, allow_negative_numbers = true)]
    min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// ba, nonba, rf or fso.
    #[arg(long, value_parser = parse_enum::<Objective>)]
    objective: Option<Objective>,
    /// Altitude range for custom2d.
    #[arg(long)]
    alt_min: Option<f64>,
    #[arg(long)]
    alt_max: Option<f64>,
    #[arg(long)]
    alt_steps: Option<usize>,
}

impl GridArgs {
    fn spec(&self, parameter: Option<Parameter>) -> GridSpec {
        let altitude = match (self.alt_min, self.alt_max, self.alt_steps) {
            (None, None, None) => None,
            (lo, hi, n) => Some(Range1d::new(
                lo.unwrap_or(10.0),
                hi.unwrap_or(150.0),
                n.unwrap_or(29),
            )),
        };
        GridSpec {
            axis: self.axis,
            parameter,
            min: self.min,
            max: self.max,
            steps: self.steps,
            altitude,
            objective: self.objective,
        }
    }
}

/// Parses a snake_case enum name through its serde representation.
fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn context(cli: &Cli) -> Result<Context> {
    let mut file = match &cli.config {
        Some(path) => load_config(path)?.file,
        None => ScenarioConfig::default(),
    };
    let sim = &mut file.sim;
    if let Some(seed) = cli.seed {
        sim.master_seed = seed;
    }
    if let Some(slots) = cli.slots {
        sim.n_slots = slots;
    }
    if cli.gg {
        sim.enable_gg = true;
    }
    if let Some(r) = cli.reproducible {
        sim.reproducible = r;
    }
    if cli.workers.is_some() {
        sim.worker_hint = cli.workers;
    }
    Ok(Context {
        loaded: file.resolve().context("applying command-line overrides")?,
        monte_carlo: cli.mc,
        out: cli.out.clone(),
    })
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Validate {
            ks_draws,
            random_configs,
        } => {
            let mut opts = ValidationOptions::default();
            opts.seed = cli.seed.unwrap_or(opts.seed);
            opts.slots = cli.slots.unwrap_or(opts.slots);
            opts.ks_draws = ks_draws.unwrap_or(opts.ks_draws);
            opts.random_configs = random_configs.unwrap_or(opts.random_configs);
            commands::run_validate(&opts, cli.out.as_deref())
        }
        Command::Rate => commands::rate(&context(cli)?).map(|_| true),
        Command::Sweep { grid, parameter } => {
            commands::run_sweep(&context(cli)?, &grid.spec(*parameter)).map(|_| true)
        }
        Command::Optimize { grid } => {
            commands::run_optimize(&context(cli)?, &grid.spec(None)).map(|_| true)
        }
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    use uav_relay_core::Error as E;
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<E>() {
            return match core {
                E::Domain { .. } => "domain",
                E::Overflow { .. } => "overflow",
                E::NonConvergence { .. } => "non_convergence",
                E::Quadrature { .. } => "quadrature",
                E::DegenerateOrientation(_) => "degenerate_orientation",
                E::InvalidParameter { .. } => "invalid_parameter",
                E::Regime(_) => "regime",
                E::Config(_) => "config",
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return "io";
        }
    }
    "usage"
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) if output::is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            let record = json!({
                "error": { "kind": error_kind(&e), "message": format!("{e:#}") }
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}
