//! Command-line front end: configuration, subcommands and outputs.

pub mod commands;
pub mod config;
pub mod output;

use spinbox::error::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

/// Exit code for a library error raised while handling configuration.
pub fn config_exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidParameter(_) | Error::InvalidMode { .. } => exit::CONFIG,
        Error::Io { .. } => exit::IO,
        _ => exit::NUMERICAL,
    }
}

/// Exit code for an error raised while producing outputs. Malformed input
/// files count as I/O failures here.
pub fn run_exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Parse { .. } | Error::GridMismatch => exit::IO,
        _ => exit::NUMERICAL,
    }
}
