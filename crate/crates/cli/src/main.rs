//! `refactor-guard` command line.
//!
//! Exit code 1 is a negative answer, such as a failed gate or no surviving
//! candidate. Exit code 2 means the input or the config could not be used.

mod commands;

use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "refactor-guard", version, about = "Validated LLM refactoring for code smells")]
struct Cli {
    /// Engine config file. Falls back to $REFACTOR_GUARD_CONFIG, then
    /// ./refactor-guard.json, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report smells and CodeHealth for source files.
    Scan {
        #[arg(default_value = ".")]
        paths: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Record the current CodeHealth of every function as a baseline.
    Baseline {
        #[arg(default_value = ".")]
        paths: Vec<PathBuf>,
        #[arg(long, short, default_value = "refactor-guard.baseline.json")]
        output: PathBuf,
    },
    /// Fail when any function's CodeHealth declined against the baseline.
    Gate {
        #[arg(long, default_value = "refactor-guard.baseline.json")]
        baseline: PathBuf,
        #[arg(default_value = ".")]
        paths: Vec<PathBuf>,
        /// Also generate refactorings for the declines and store them for review.
        #[arg(long)]
        propose: bool,
        #[arg(long)]
        json: bool,
    },
    /// Generate and validate a refactoring for one smell in a file.
    Refactor {
        path: PathBuf,
        #[arg(long)]
        function: Option<String>,
        /// Smell kind, e.g. ComplexMethod or complex-method.
        #[arg(long)]
        smell: Option<String>,
        /// Rewrite the file when the best candidate has High confidence.
        #[arg(long, conflicts_with = "propose")]
        apply: bool,
        /// Store candidates for review (the default).
        #[arg(long)]
        propose: bool,
    },
    /// Serve the review API and UI.
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Directory with the built review UI.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match refactor_guard_core::config::EngineConfig::discover(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match cli.command {
        Command::Scan { paths, json } => commands::scan(&config, &paths, json),
        Command::Baseline { paths, output } => commands::baseline(&config, &paths, &output),
        Command::Gate { baseline, paths, propose, json } => commands::gate(&config, &baseline, &paths, propose, json),
        Command::Refactor { path, function, smell, apply, propose: _ } => {
            commands::refactor(&config, &path, function.as_deref(), smell.as_deref(), apply)
        }
        Command::Serve { port, bind, ui_dir } => commands::serve(&config, (bind, port).into(), ui_dir),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
