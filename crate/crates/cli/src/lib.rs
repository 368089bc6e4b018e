//! Command-line driver: argument parsing, reproducible run configurations
//! and the consistency checks.

pub mod args;
pub mod config;
pub mod error;
pub mod run;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::Cli;
pub use config::RunConfig;
pub use error::CliError;
pub use run::{execute, Outcome};

/// Parse, run and print; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let config = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("per1: {e}");
            return e.exit_code();
        }
    };
    match execute(&config) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let printed = match &outcome.text {
                Some(text) => {
                    eprintln!("{}", serde_json::to_string(&config).expect("config serialises"));
                    stdout.write_all(text.as_bytes())
                }
                None => writeln!(stdout, "{}", serde_json::to_string_pretty(&outcome.report).expect("report serialises")),
            };
            if printed.is_err() {
                return 1;
            }
            if outcome.ok {
                0
            } else {
                eprintln!("per1: some checks failed");
                1
            }
        }
        Err(e) => {
            eprintln!("per1: {e}");
            e.exit_code()
        }
    }
}
