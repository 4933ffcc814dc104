//! `ncclab`: command-line driver for the circuit toolkit.
//!
//! Exit status: 0 on success, 1 on user or domain errors, 2 when an
//! internal invariant is violated.

mod commands;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use commands::Command;

#[derive(Parser, Debug)]
#[command(name = "ncclab", version, about = "Exact toolkit for non-commutative arithmetic circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(std::env::args_os()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ncclab: {}", f.message);
            ExitCode::from(f.status.code())
        }
    }
}
