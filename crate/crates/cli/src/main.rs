use std::path::PathBuf;
use std::process::ExitCode;

use bridge_cli::{cmd_races, cmd_run, parse_reports, ReportKind, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bridge-sim", version, about = "Deterministic two-chain private bridge simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write reports.
    Run(Common),
    /// Sweep the scenario's double-withdrawal adversary over t'.
    Races(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated subset of transcript,races,anonymity,liquidity,storage, or `all`.
    #[arg(long, default_value = "all", value_parser = parse_reports)]
    reports: std::collections::BTreeSet<ReportKind>,
    /// Replaces the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces the processing-delay slack epsilon (negative values allowed).
    #[arg(long, allow_hyphen_values = true)]
    epsilon_override: Option<i64>,
}

impl Common {
    fn config(self) -> RunConfig {
        RunConfig {
            scenario_path: self.scenario,
            out_dir: self.out,
            reports: self.reports,
            seed_override: self.seed,
            epsilon_override: self.epsilon_override,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(c) => cmd_run(&c.config()),
        Command::Races(c) => cmd_races(&c.config()),
    };
    match result {
        Ok(report) => {
            for path in &report.written {
                println!("wrote {}", path.display());
            }
            for failure in &report.failures {
                eprintln!("{failure}");
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
