//! Report envelopes, artifact writing and the exit-code contract.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use bosonic_sdp::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Command;

pub const SCHEMA_VERSION: &str = "bosonic-sdp.report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    AcceptanceFailure = 1,
    IterationCap = 2,
    Infeasible = 3,
    Usage = 64,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

/// A failed command: exit code and message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub exit: Exit,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::Usage,
            message: message.into(),
        }
    }

    pub fn acceptance(message: impl Into<String>) -> Self {
        Self {
            exit: Exit::AcceptanceFailure,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::DimensionMismatch { .. }
            | Error::NotHermitian { .. }
            | Error::NonFinite { .. }
            | Error::NotPsd { .. }
            | Error::InvalidArgument(_)
            | Error::Instance(_) => Exit::Usage,
            Error::DualInfeasible { .. }
            | Error::EmptyInterior { .. }
            | Error::DualUnbounded
            | Error::StepUnderflow { .. } => Exit::Infeasible,
            Error::Domain { .. } | Error::EigenFailure | Error::BudgetInfeasible { .. } | Error::SingularHessian => {
                Exit::AcceptanceFailure
            }
        };
        Self {
            exit,
            message: e.to_string(),
        }
    }
}

pub type Outcome = Result<Exit, Failure>;

/// `{schema_version, config, result}` with the parsed command line echoed.
pub fn envelope<T: Serialize>(config: &Command, result: &T) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "result": result,
    })
}

/// Writes through a sibling temporary file so a failed write leaves no
/// partial artifact behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let io = |e: std::io::Error| Failure {
        exit: Exit::AcceptanceFailure,
        message: format!("writing {}: {e}", path.display()),
    };
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Prints the report and writes it to `path` when given.
pub fn emit(report: &Value, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    if let Some(p) = path {
        write_atomic(p, &text)?;
    }
    print!("{text}");
    Ok(())
}

/// JSON has no infinity; unbounded values are reported as strings.
pub fn number_or_inf(v: f64) -> Value {
    if v == f64::INFINITY {
        json!("+inf")
    } else {
        json!(v)
    }
}
