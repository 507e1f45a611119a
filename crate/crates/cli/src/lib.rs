//! Command-line front end: experiment runs that emit CSV, and signal denoising.

pub mod args;
pub mod commands;
pub mod manifest;

use std::ffi::OsString;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command};
use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

impl From<tbt::Error> for CliError {
    fn from(e: tbt::Error) -> Self {
        match e {
            tbt::Error::Configuration(_) => CliError::Usage(e.to_string()),
            tbt::Error::Capability(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

/// Parses `argv`, runs the command and maps the outcome to a process exit code.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs a command, writes its files and manifest, and returns the text for stdout.
pub fn dispatch(cmd: Command) -> Result<String, CliError> {
    let cmd = match cmd {
        Command::Replay(r) => {
            let manifest = RunManifest::read(&r.manifest)?;
            let mut inner = Cli::try_parse_from(manifest.argv())
                .map_err(|e| CliError::Data(format!("manifest does not describe a valid run: {e}")))?
                .command;
            if matches!(inner, Command::Replay(_)) {
                return Err(CliError::Data("a manifest cannot record a replay".into()));
            }
            if let Some(out) = r.out {
                inner.set_out(out);
            }
            inner
        }
        cmd => cmd,
    };
    let start = Instant::now();
    let output = commands::execute(&cmd)?;
    for (path, content) in &output.files {
        write(path, content)?;
    }
    if let Some(out) = cmd.out() {
        let manifest = RunManifest::for_command(&cmd, start.elapsed().as_secs_f64());
        write(&RunManifest::path_for(out), &manifest.render())?;
    }
    Ok(output.stdout)
}

fn write(path: &std::path::Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}
