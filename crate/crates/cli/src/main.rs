use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use pencilbeam::harness::{run_from_path, Command, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Spectrum,
    Regions,
    Count,
    Evolve,
    LaplaceCheck,
    ResolventCheck,
    VerifyAll,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Regions => Command::Regions,
            Cmd::Count => Command::Count,
            Cmd::Evolve => Command::Evolve,
            Cmd::LaplaceCheck => Command::LaplaceCheck,
            Cmd::ResolventCheck => Command::ResolventCheck,
            Cmd::VerifyAll => Command::VerifyAll,
        }
    }
}

/// Spectral and time-domain analysis of a damped beam under tension.
#[derive(Debug, Parser)]
#[command(name = "pencilbeam", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the random-surrogate suites, overriding `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let opts = RunOptions {
        out: cli.out,
        seed: cli.seed,
    };
    let (code, message) = run_from_path(cli.command.into(), &cli.config, &opts);
    if code == 0 {
        println!("{message}");
    } else {
        eprintln!("{message}");
    }
    ExitCode::from(code as u8)
}
