//! `dop`: attack metrics, sweeps, bonus searches and seeded simulations for
//! committee reward schemes.
//!
//! Every command can read a JSON config (`--config`) whose fields mirror the
//! flag names; explicit flags win over file values. Exit codes: 0 success,
//! 2 invalid flags or config, 3 when the run finished but produced only
//! undefined cost metrics, 1 for anything internal (IO, failed
//! verification).

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{Attack, Criterion, FileConfig, Suite, System};

const FILLER_HELP: &str = "When stakes are given as an attacker/victim pair, the remaining \
stake is split evenly over ceil(remaining / (1/3)) filler players so no filler exceeds the 1/3 \
power cap; --fillers overrides that count.";

#[derive(Parser)]
#[command(
    name = "dop",
    version,
    about = "Denial-of-profit attack analysis for committee reward schemes"
)]
struct Cli {
    /// JSON config whose fields mirror the flag names; flags win
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Effectiveness and cost of a single attack
    Metrics(MetricsArgs),
    /// CSV grid of attack metrics over attacker and victim stakes
    Sweep(SweepArgs),
    /// Smallest leader bonus meeting an equilibrium criterion
    SearchBonus(SearchBonusArgs),
    /// Smallest effectiveness bound no single bonus can beat
    CriticalEpsilon(CriticalEpsilonArgs),
    /// CSV of omission effectiveness for several aggregator counts
    Aggregators(AggregatorsArgs),
    /// Seeded Monte Carlo run checked against the exact utilities (JSON)
    Simulate(SimulateArgs),
    /// Worst-case attack effectiveness and cost over all player pairs
    Robustness(RobustnessArgs),
    /// Re-check the cross-attack identities or the simulation oracle
    Verify(VerifyArgs),
}

#[derive(Args, Default)]
pub struct SystemArgs {
    /// Reward system to analyze
    #[arg(long, value_enum)]
    pub system: Option<System>,
    /// Bonus threshold t (threshold and cosmos systems)
    #[arg(long)]
    pub t: Option<f64>,
    /// Base payout fraction a (base and cosmos systems)
    #[arg(long)]
    pub a: Option<f64>,
    /// Leader bonus b
    #[arg(long)]
    pub b: Option<f64>,
    /// Late-inclusion fraction rho (window and ethereum systems)
    #[arg(long)]
    pub rho: Option<f64>,
    /// Inclusion window length w (window and ethereum systems)
    #[arg(long)]
    pub w: Option<u32>,
    /// Committee size c (ethereum system)
    #[arg(long)]
    pub c: Option<u32>,
    /// Mean aggregator count (ethereum system)
    #[arg(long)]
    pub mean_aggs: Option<f64>,
    /// Full round reward
    #[arg(long)]
    pub rmax: Option<f64>,
}

#[derive(Args, Default)]
pub struct PowerArgs {
    /// Stake shares of every player, comma separated, summing to 1
    #[arg(long, value_delimiter = ',')]
    pub powers: Option<Vec<f64>>,
    /// Attacker stake share (pair form; fillers absorb the rest)
    #[arg(long)]
    pub attacker_power: Option<f64>,
    /// Victim stake share (pair form)
    #[arg(long)]
    pub victim_power: Option<f64>,
    /// Filler player count for the pair form
    #[arg(long)]
    pub fillers: Option<usize>,
    /// Attacker player index (explicit powers form)
    #[arg(long)]
    pub attacker: Option<usize>,
    /// Victim player index (explicit powers form)
    #[arg(long)]
    pub victim: Option<usize>,
}

#[derive(Args, Default)]
#[command(after_help = FILLER_HELP)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[command(flatten)]
    pub players: PowerArgs,
    /// Attack kind
    #[arg(long, value_enum)]
    pub attack: Option<Attack>,
}

#[derive(Args, Default)]
pub struct SweepArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    /// Attack kinds to sweep, comma separated
    #[arg(long, value_enum, value_delimiter = ',')]
    pub kinds: Option<Vec<Attack>>,
    /// Attacker stake grid, comma separated
    #[arg(long, value_delimiter = ',')]
    pub attackers: Option<Vec<f64>>,
    /// Victim stakes, comma separated
    #[arg(long, value_delimiter = ',')]
    pub victims: Option<Vec<f64>>,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Default)]
pub struct SearchBonusArgs {
    /// System whose bonus is searched (cosmos or ethereum)
    #[arg(long, value_enum)]
    pub system: Option<System>,
    /// Equilibrium criterion (nash for cosmos, balanced for ethereum)
    #[arg(long, value_enum)]
    pub criterion: Option<Criterion>,
    /// Bonus threshold t (nash search)
    #[arg(long)]
    pub t: Option<f64>,
    /// Base payout fraction a (nash search)
    #[arg(long)]
    pub a: Option<f64>,
    /// Late-inclusion fraction rho (balanced search)
    #[arg(long)]
    pub rho: Option<f64>,
    /// Cost-balance slack epsilon (balanced search)
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Bisection tolerance on the reported bonus
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Args, Default)]
pub struct CriticalEpsilonArgs {
    /// Late-inclusion fraction rho
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Args, Default)]
pub struct AggregatorsArgs {
    /// Mean aggregator counts to compare, comma separated
    #[arg(long, value_delimiter = ',')]
    pub mean_aggs: Option<Vec<f64>>,
    /// Attacker stake grid, comma separated
    #[arg(long, value_delimiter = ',')]
    pub attackers: Option<Vec<f64>>,
    /// Late-inclusion fraction rho
    #[arg(long)]
    pub rho: Option<f64>,
    /// Leader bonus b
    #[arg(long)]
    pub b: Option<f64>,
    /// Committee size c
    #[arg(long)]
    pub c: Option<u32>,
    /// Inclusion window length w
    #[arg(long)]
    pub w: Option<u32>,
    /// Full round reward
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Default)]
#[command(after_help = FILLER_HELP)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[command(flatten)]
    pub players: PowerArgs,
    /// Attack kind; honest play when omitted
    #[arg(long, value_enum)]
    pub attack: Option<Attack>,
    /// Simulated rounds
    #[arg(long)]
    pub rounds: Option<u64>,
    /// RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Default)]
#[command(after_help = FILLER_HELP)]
pub struct RobustnessArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[command(flatten)]
    pub players: PowerArgs,
    /// Attack kinds to scan, comma separated
    #[arg(long, value_enum, value_delimiter = ',')]
    pub kinds: Option<Vec<Attack>>,
}

#[derive(Args, Default)]
pub struct VerifyArgs {
    /// Check suite to run
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Stake grid step for the theorems suite
    #[arg(long)]
    pub grid: Option<f64>,
    /// Simulated rounds per oracle case
    #[arg(long)]
    pub rounds: Option<u64>,
    /// RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when omitted
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() {
    // Die quietly when a downstream pipe closes early (`dop sweep | head`),
    // like any other stream-emitting tool; Rust's default turns that into a
    // panic on the first print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let file = match cli.config.as_deref().map(FileConfig::load).transpose() {
        Ok(loaded) => loaded.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    let command = match cli.command.map(Ok).unwrap_or_else(|| command_from_file(&file)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match dispatch(command, &file) {
        Ok(commands::Outcome::Done) => 0,
        Ok(commands::Outcome::OnlyUndefined) => 3,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, file: &FileConfig) -> anyhow::Result<commands::Outcome> {
    match command {
        Command::Metrics(args) => commands::metrics(&args, file),
        Command::Sweep(args) => commands::sweep(&args, file),
        Command::SearchBonus(args) => commands::search_bonus(&args, file),
        Command::CriticalEpsilon(args) => commands::critical_epsilon(&args, file),
        Command::Aggregators(args) => commands::aggregators(&args, file),
        Command::Simulate(args) => commands::simulate(&args, file),
        Command::Robustness(args) => commands::robustness(&args, file),
        Command::Verify(args) => commands::verify(&args, file),
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<dop_core::Error>() {
        Some(dop_core::Error::InvalidArgument(_)) => 2,
        Some(dop_core::Error::UndefinedMetric(_)) => 3,
        None => 1,
    }
}

/// Optional DOP_THREADS caps the worker pool used by simulations.
fn configure_threads() -> Result<(), dop_core::Error> {
    let Ok(raw) = std::env::var("DOP_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| config::bad(format!("DOP_THREADS must be a positive integer, got `{raw}`")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// A config file can name the command itself when none is given on the
/// command line.
fn command_from_file(file: &FileConfig) -> Result<Command, dop_core::Error> {
    let Some(name) = file.command.as_deref() else {
        return Err(config::bad(
            "no command given on the command line or in the config",
        ));
    };
    Ok(match name {
        "metrics" => Command::Metrics(MetricsArgs::default()),
        "sweep" => Command::Sweep(SweepArgs::default()),
        "search-bonus" => Command::SearchBonus(SearchBonusArgs::default()),
        "critical-epsilon" => Command::CriticalEpsilon(CriticalEpsilonArgs::default()),
        "aggregators" => Command::Aggregators(AggregatorsArgs::default()),
        "simulate" => Command::Simulate(SimulateArgs::default()),
        "robustness" => Command::Robustness(RobustnessArgs::default()),
        "verify" => Command::Verify(VerifyArgs::default()),
        other => return Err(config::bad(format!("unknown command `{other}`"))),
    })
}
