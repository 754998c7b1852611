//! Library half of the `rcsim` command: configuration, subcommand drivers
//! and figure datasets.

pub mod config;
pub mod energy;
pub mod pipeline;
pub mod reproduce;
pub mod scaling;

use rcsim_core::Error;

/// Process exit status for an error, looking through subtask wrappers.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Config(_) | Error::Input(_) | Error::Infeasible(_) => 2,
        Error::NumericFault { .. } => 3,
        Error::Capacity { .. } => 4,
        _ => 1,
    }
}

/// Short machine-readable name of the error class.
pub fn error_kind(err: &Error) -> &'static str {
    match err.root() {
        Error::Config(_) => "config",
        Error::Input(_) => "input",
        Error::Capacity { .. } => "capacity",
        Error::Infeasible(_) => "infeasible",
        Error::NumericFault { .. } => "numeric_fault",
        Error::Subtask { .. } => "subtask",
        Error::Statistics(_) => "statistics",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}
