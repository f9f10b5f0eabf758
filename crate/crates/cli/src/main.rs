mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};

/// Usage error (unknown flag, bad value, unknown algorithm).
pub const EXIT_USAGE: i32 = 64;
/// Malformed input data.
pub const EXIT_DATA: i32 = 65;
/// Missing or unreadable input file.
pub const EXIT_NO_INPUT: i32 = 66;
/// Output file cannot be created.
pub const EXIT_CANT_CREATE: i32 = 73;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(EXIT_DATA, message)
    }

    pub fn no_input(message: impl Into<String>) -> Self {
        Self::new(EXIT_NO_INPUT, message)
    }

    pub fn cant_create(message: impl Into<String>) -> Self {
        Self::new(EXIT_CANT_CREATE, message)
    }
}

fn dispatch() -> Result<i32, CliError> {
    let argv = config::merge(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return Ok(code);
        }
    };
    match &cli.command {
        Command::Validate(a) => commands::cmd_validate(a),
        Command::Gen(a) => commands::cmd_gen(a),
        Command::Solve(a) => commands::cmd_solve(a),
        Command::Compare(a) => commands::cmd_compare(a),
        Command::Deblur(a) => commands::cmd_deblur(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPLIT_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let code = dispatch().unwrap_or_else(|e| {
        eprintln!("error: {}", e.message);
        e.code
    });
    ExitCode::from(code as u8)
}
