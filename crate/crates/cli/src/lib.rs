//! Front end of the `scatter` binary.

pub mod args;
mod commands;
pub mod error;
pub mod grid;
pub mod io;
pub mod table;

use args::{Cli, Command, InvertCommand};
use clap::Parser;
use error::{CliError, CliResult};
use std::ffi::OsString;

/// Parses `args` (program name first) and runs the selected command.
pub fn run<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::input(e.render().to_string().trim_end().to_string())),
    };
    configure_threads()?;
    let out = cli.out.as_path();
    let manifest = match &cli.command {
        Command::Forward(a) => commands::forward::run(a, out),
        Command::Trace(a) => commands::trace::run(a, out),
        Command::Spectral(a) => commands::spectral::run(a, out),
        Command::Invert(InvertCommand::Nodal(a)) => commands::nodal::run(a, out),
        Command::Invert(InvertCommand::Jwkb(a)) => commands::jwkb::run(a, out),
        Command::Invert(InvertCommand::Born(a)) => commands::born::run(a, out),
        Command::Compare(a) => commands::compare::run(a, out),
    }?;
    for o in &manifest.outputs {
        println!("{}", out.join(&o.path).display());
    }
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    let Some(raw) = std::env::var_os("SCATTER_THREADS") else {
        return Ok(());
    };
    let n = raw
        .to_str()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("SCATTER_THREADS must be a positive integer, got {raw:?}")))?;
    // A second call in the same process (as in tests) finds the pool built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
