//! Batch front door for the MCIES scheduling engine: scenario reduction,
//! the bi-level price search, mode comparisons, tie-line sweeps, and
//! solution re-validation, all emitting stamped artifact files.

mod cmd_check;
mod cmd_cluster;
mod cmd_modes;
mod cmd_schedule;
mod cmd_sweep;
mod inputs;
mod outputs;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use outputs::Outcome;

#[derive(Parser)]
#[command(
    name = "mcies",
    version,
    about = "Day-ahead pricing and dispatch for a multi-community integrated energy system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce renewable sample paths to probability-weighted scenarios
    Cluster(ClusterArgs),
    /// Run the price search and write the solution artifacts
    Schedule(ScheduleArgs),
    /// Compare full, no-response, and no-tie-line operation
    Modes(ModesArgs),
    /// Profit as a function of the tie-line capacity
    Sweep(SweepArgs),
    /// Re-validate a previously written solution file
    Check(CheckArgs),
}

/// Model and data sources shared by the scheduling commands. Every value
/// is a file path or the literal `bundled` for the built-in example.
#[derive(Args)]
struct InputArgs {
    /// System model JSON
    #[arg(long, default_value = inputs::BUNDLED)]
    system: String,
    /// Outdoor temperature and baseline load CSV
    #[arg(long, default_value = inputs::BUNDLED)]
    series: String,
    /// Wind sample paths CSV
    #[arg(long, default_value = inputs::BUNDLED)]
    wt: String,
    /// Solar sample paths CSV
    #[arg(long, default_value = inputs::BUNDLED)]
    pv: String,
}

/// Price-search settings shared by schedule, modes, and sweep.
#[derive(Args)]
struct SearchArgs {
    /// Population size of the evolutionary search
    #[arg(long, default_value_t = 50)]
    population: usize,
    /// Generation budget of the evolutionary search
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    /// Seed for every randomized step of the run
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Equilibrium certificate thresholds.
#[derive(Args)]
struct CertArgs {
    /// Maximum relative follower cost gap
    #[arg(long, default_value_t = 1e-4)]
    eps_follower: f64,
    /// Maximum relative leader profit improvement any probe may find
    #[arg(long, default_value_t = 0.005)]
    eps_leader: f64,
    /// Number of perturbed price schedules fired at the leader position
    #[arg(long, default_value_t = 100)]
    probes: usize,
}

#[derive(Args)]
struct ClusterArgs {
    /// Sample CSV for a single family
    #[arg(long, conflicts_with_all = ["wt", "pv"])]
    samples: Option<String>,
    /// Wind sample CSV (with --pv), or "bundled"
    #[arg(long, requires = "pv")]
    wt: Option<String>,
    /// Solar sample CSV (with --wt), or "bundled"
    #[arg(long, requires = "wt")]
    pv: Option<String>,
    /// Smallest cluster count scanned
    #[arg(long, default_value_t = 3)]
    k_min: usize,
    /// Largest cluster count scanned
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long, env = "MCIES_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    inputs: InputArgs,
    /// Operating mode: 1 full, 2 without demand response, 3 without tie-lines
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    mode: u8,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    cert: CertArgs,
    /// Output directory
    #[arg(long, env = "MCIES_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ModesArgs {
    #[command(flatten)]
    inputs: InputArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Output directory
    #[arg(long, env = "MCIES_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    inputs: InputArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Tie-line capacities to evaluate, kW
    #[arg(long, value_delimiter = ',', default_value = "0,100,200,300,400,500,600,700")]
    caps: Vec<f64>,
    /// Output directory
    #[arg(long, env = "MCIES_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    /// Solution JSON written by schedule or modes
    #[arg(long)]
    solution: PathBuf,
    #[command(flatten)]
    inputs: InputArgs,
    #[command(flatten)]
    cert: CertArgs,
    /// Seed for the certificate's probe draws
    #[arg(long, default_value_t = 0)]
    probe_seed: u64,
    /// Output directory
    #[arg(long, env = "MCIES_OUT_DIR", default_value = "out")]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            // Bad invocation: report as an input error.
            eprint!("{e}");
            std::process::exit(3);
        }
        Err(e) => {
            // Help or version output.
            print!("{e}");
            std::process::exit(0);
        }
    };
    let result = match &cli.command {
        Command::Cluster(args) => cmd_cluster::run(args),
        Command::Schedule(args) => cmd_schedule::run(args),
        Command::Modes(args) => cmd_modes::run(args),
        Command::Sweep(args) => cmd_sweep::run(args),
        Command::Check(args) => cmd_check::run(args),
    };
    let code = match result {
        Ok(Outcome::Clean) => 0,
        Ok(Outcome::Violations) => 2,
        Err(e) => {
            eprintln!("error: {e:#}");
            3
        }
    };
    std::process::exit(code);
}
