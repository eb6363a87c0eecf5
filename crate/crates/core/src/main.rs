use clap::{Parser, ValueEnum};
use fel_keldysh::cli::{run, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Selfenergy,
    Dispersion,
    Pierce,
    Lgk,
    Langevin,
    Meanfield,
    Sweep,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Selfenergy => Subcommand::SelfEnergy,
            Command::Dispersion => Subcommand::Dispersion,
            Command::Pierce => Subcommand::Pierce,
            Command::Lgk => Subcommand::Lgk,
            Command::Langevin => Subcommand::Langevin,
            Command::Meanfield => Subcommand::MeanField,
            Command::Sweep => Subcommand::Sweep,
        }
    }
}

/// Keldysh FEL toolkit: self-energies, threshold, LGK parameters, Langevin and
/// mean-field runs.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Flat key = value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip sweep points that already completed.
    #[arg(long)]
    resume: bool,
}

fn main() {
    let args = Args::parse();
    let code = run(args.command.into(), &args.config, &args.out, args.seed, args.resume);
    std::process::exit(code);
}
