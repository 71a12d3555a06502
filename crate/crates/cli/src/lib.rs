//! Command line front end and JSON API server for roofkit.

pub mod args;
pub mod commands;
pub mod input;
pub mod server;
mod table;

use std::fmt;

/// Exit status for a failure that is not the caller's input: a design that
/// does not fit, or a port that cannot be bound.
#[derive(Debug)]
pub struct EnvironmentError(pub String);

impl fmt::Display for EnvironmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for EnvironmentError {}

pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

/// 2 for infeasible designs and environment failures, 1 for everything
/// else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<EnvironmentError>().is_some() {
            return EXIT_INFEASIBLE;
        }
        if let Some(e) = cause.downcast_ref::<roofkit::Error>() {
            return if e.is_input_error() { EXIT_INPUT } else { EXIT_INFEASIBLE };
        }
    }
    EXIT_INPUT
}
