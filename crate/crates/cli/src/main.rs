//! `hspmap`: build, compare and certify transport maps between point clouds.
//!
//! Exit status: 0 on success, 1 for invalid input or a failed check, 2 when a
//! file cannot be read or written.

mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::{Sink, EXIT_INVALID};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INVALID),
            };
        }
    };
    let sink = Sink::new(cli.out_dir);
    let outcome = match &cli.command {
        Command::Map(a) => commands::map(a, &sink),
        Command::Table(a) => commands::table(a, &sink),
        Command::Interp(a) => commands::interp(a, &sink),
        Command::Bench(a) => commands::bench(a, &sink),
        Command::Verify(a) => commands::verify(a, &sink),
        Command::Gen(a) => commands::generate(a, &sink),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
