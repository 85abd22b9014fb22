//! Command-line front end for the `coherence` library: evaluates measures on
//! state files and runs the seeded verification sweeps, emitting CSV reports
//! with an embedded run manifest.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;
pub mod trials;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use error::{exit, CliError, CliResult};

/// Parses `argv` and runs the selected subcommand, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests exit 0; malformed arguments exit 2.
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli) -> CliResult<i32> {
    use args::Command;
    match &cli.command {
        Command::Measure(a) => commands::measure::run(a),
        Command::VerifyTheorem2(a) => commands::theorem2::run(a),
        Command::VerifyMonotonicity(a) => commands::monotonicity::run(a),
        Command::Ordering(a) => commands::ordering::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
    }
}
