//! Command-line front end for `gevrey-core`.
//!
//! [`parse::parse_operator`] reads differential operators such as
//! `z^2*D + 1`, [`expr::Expr`] reads closed-form functions such as
//! `log(1+u)`, and [`run`] dispatches a full command line and returns the
//! exit code together with the JSON written to each stream.

pub mod app;
pub mod expr;
pub mod parse;

use thiserror::Error;

pub use app::{run, run_with_env, Outcome, ORACLE_TOL, QUAD_TOL_ENV};

/// Failure of a CLI invocation.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(parse::ParseError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Core(#[from] gevrey_core::Error),
}

impl CliError {
    /// 1 for malformed input, 2 for domain or convergence failures,
    /// 3 for numerical breakdowns.
    pub fn exit_code(&self) -> i32 {
        use gevrey_core::Error as E;
        match self {
            CliError::Parse(_) | CliError::Usage(_) | CliError::Input(_) => 1,
            CliError::Core(e) if e.is_domain() => 2,
            CliError::Core(
                E::InvalidSeries(_)
                | E::InvalidOperator(_)
                | E::ZeroOperator
                | E::InvalidArgument(_),
            ) => 1,
            CliError::Core(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => match self {
                CliError::Parse(_) => "parse",
                CliError::Usage(_) => "usage",
                _ => "input",
            },
            2 => "domain",
            _ => "numeric",
        }
    }
}
