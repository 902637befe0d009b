//! Command-line surface over the scheduling library: generation, solving,
//! replay, evaluation and parameter sweeps, all reproducible from explicit
//! seeds. Set `AEOS_LOG=1` for progress chatter on stderr.

use anyhow::Result;
use clap::{Parser, Subcommand};

pub mod evaluate;
pub mod formats;
pub mod generate;
pub mod solve;
pub mod sweep;

#[derive(Parser, Debug)]
#[command(
    name = "aeos",
    version,
    about = "Agile Earth-observation scheduling under cloud-coverage uncertainty"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a benchmark instance file.
    Generate(generate::GenerateArgs),
    /// Solve an instance and write the schedule, manifest and trace.
    Solve(solve::SolveArgs),
    /// Reproduce a previous solve from its manifest, bit for bit.
    Replay(solve::ReplayArgs),
    /// Validate a schedule and evaluate its confidence profit.
    Evaluate(evaluate::EvaluateArgs),
    /// Run the solver across a parameter grid and aggregate the results.
    Sweep(sweep::SweepArgs),
}

/// Whether progress output is enabled via the `AEOS_LOG` variable.
pub fn verbose() -> bool {
    std::env::var("AEOS_LOG")
        .map(|v| !v.is_empty() && v != "0" && !v.eq_ignore_ascii_case("off"))
        .unwrap_or(false)
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => generate::cmd_generate(args),
        Command::Solve(args) => solve::cmd_solve(args),
        Command::Replay(args) => solve::cmd_replay(args),
        Command::Evaluate(args) => evaluate::cmd_evaluate(args),
        Command::Sweep(args) => sweep::cmd_sweep(args),
    }
}
