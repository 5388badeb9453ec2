//! Command-line front end for `nap-core`.
//!
//! A program is parsed completely before anything runs; statements then
//! execute in order and stop at the first error. Output is deterministic.

mod query;
mod run;

use std::fmt;

use serde::Serialize;

use nap_core::oracle::Caps;

pub use query::{line_column, parse, Command, Program, SpaceDecl, Stmt};
pub use run::{decimal, execute, Execution, Provenance, ResultRecord, ValueKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Syntax,
    UnknownIdentifier,
    FamilyMismatch,
    Usage,
    Event,
    Engine,
    Oracle,
}

impl ErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::UnknownIdentifier => "unknown identifier",
            ErrorKind::FamilyMismatch => "family mismatch",
            ErrorKind::Usage => "usage error",
            ErrorKind::Event => "event error",
            ErrorKind::Engine => "engine error",
            ErrorKind::Oracle => "oracle error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " at line {l}, column {c}")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    /// One JSON object per line.
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    pub format: Format,
    /// Digits after the point in decimal shadows of standard parts.
    pub digits: usize,
    pub caps: Caps,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            format: Format::Text,
            digits: 6,
            caps: Caps::default(),
        }
    }
}

/// Output of a whole run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    /// 0 on success, 1 when a verification or axiom check failed, 2 on error.
    pub status: i32,
}

pub fn render_error(e: &CliError, format: Format) -> String {
    match format {
        Format::Text => format!("{e}\n"),
        Format::Json => {
            #[derive(Serialize)]
            struct Wrapped<'a> {
                error: &'a CliError,
            }
            format!("{}\n", serde_json::to_string(&Wrapped { error: e }).expect("serializable"))
        }
    }
}

/// Parses and executes `src`.
pub fn run(src: &str, opts: &Options) -> Outcome {
    let program = match parse(src) {
        Ok(p) => p,
        Err(e) => {
            return Outcome {
                stdout: String::new(),
                stderr: render_error(&e, opts.format),
                status: 2,
            }
        }
    };
    let exec = execute(&program, opts);
    let stdout = exec.render(opts);
    let (stderr, status) = match &exec.error {
        Some(e) => (render_error(e, opts.format), 2),
        None if exec.records.iter().any(|r| r.passed == Some(false)) => (String::new(), 1),
        None => (String::new(), 0),
    };
    Outcome { stdout, stderr, status }
}
