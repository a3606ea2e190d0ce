//! Command-line front end of `pspin`: flag and config-file parsing, dispatch to
//! the solvers and the simulator, and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod emit;
pub mod error;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use config::{Cli, RunConfig};
pub use error::CliError;

/// Parses `args`, runs the command and returns the process exit code:
/// 0 on success, 1 on numerical or I/O failure, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match RunConfig::resolve(cli.command).and_then(|cfg| {
        let table = commands::execute(&cfg)?;
        emit::emit(&table, &cfg, cfg.output.as_deref())
    }) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
