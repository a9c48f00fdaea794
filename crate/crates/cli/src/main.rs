//! `qkd-sim`: command-line front end for the biased-basis BB84 simulator.
//!
//! Exit codes: 0 success (or refined Accept for `run`), 2 refined Abort,
//! 1 for usage, configuration and I/O errors.

use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod sweep;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(a) => commands::run(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Compare(a) => commands::compare(a),
        Command::HashCheck(a) => commands::hash_check(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
