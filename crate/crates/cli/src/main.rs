use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use telewm_cli::{run, CommandKind, Format, RunOptions};

#[derive(Parser)]
#[command(
    name = "telewm",
    version,
    about = "Teleportation under noisy channels with weak measurement reversal"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Metric time series for each scenario.
    Evolve(RunArgs),
    /// Fidelity and deviation over (θ, t) and strength grids.
    Grid(RunArgs),
    /// Earliest time where the fidelity deviation vanishes.
    FindZeroDev(RunArgs),
    /// Trace-distance evolution and its rate of change.
    Blp(RunArgs),
    /// Monte-Carlo teleportation check of the fidelity formula.
    Oracle(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Output format; overrides the config.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TELEWM_LOG", "warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, args) = match cli.command {
        Command::Evolve(a) => (CommandKind::Evolve, a),
        Command::Grid(a) => (CommandKind::Grid, a),
        Command::FindZeroDev(a) => (CommandKind::FindZeroDev, a),
        Command::Blp(a) => (CommandKind::Blp, a),
        Command::Oracle(a) => (CommandKind::Oracle, a),
    };
    let opts = RunOptions {
        command,
        config: args.config,
        out: args.out,
        workers: args.workers,
        format: args.format,
    };
    match run(&opts) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
