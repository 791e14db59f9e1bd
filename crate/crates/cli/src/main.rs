use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sip_cli::{commands, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "sip", version, about = "Primal-dual solver for convex semi-infinite programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver and write a CSV or JSON report.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `params.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `output_path`; stdout if neither is set.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suites against the configured problem.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Smaller sample counts.
        #[arg(long)]
        quick: bool,
    },
    /// Print the derived constants as JSON.
    Constants {
        #[arg(long)]
        config: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Solve { config, seed, out } => {
            let cfg = RunConfig::load(&config)?;
            commands::solve(&cfg, seed, out.as_deref(), &mut stdout).map(drop)
        }
        Command::Check { config, quick } => {
            let cfg = RunConfig::load(&config)?;
            commands::check(&cfg, quick, &mut stdout).map(drop)
        }
        Command::Constants { config } => {
            let cfg = RunConfig::load(&config)?;
            commands::constants(&cfg, &mut stdout).map(drop)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sip: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
