//! Operator surface for a local vaultchain home.
//!
//! Exit status: 0 success, 1 rejected by the ledger (reason on stderr),
//! 2 usage error, 3 integrity or I/O failure.

pub mod args;
pub mod error;
pub mod home;
pub mod keystore;
pub mod scenario;
pub mod session;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::Cli;
pub use error::{CliError, EXIT_INTEGRITY, EXIT_OK, EXIT_REJECTED, EXIT_USAGE};
pub use session::{Access, Outcome, Session};

use args::Command;

/// Runs an already-parsed command line.
pub fn execute(cli: Cli) -> Result<Outcome, CliError> {
    let access = cli.command.access();
    let mut session = Session::open(cli.global, access)?;
    match cli.command {
        Command::RunScenario(args) => {
            let text =
                std::fs::read_to_string(&args.script).map_err(|e| CliError::io(&args.script, e))?;
            session.set_key_seed(args.seed);
            scenario::run_script(&mut session, &text)
        }
        other => session.execute(other),
    }
}

/// Parses `args` (program name first), runs, prints, and returns the exit
/// status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let json = cli.global.json;
    match execute(cli) {
        Ok(outcome) => {
            let text = outcome.render(json);
            if !text.is_empty() {
                let _ = writeln!(out, "{text}");
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
