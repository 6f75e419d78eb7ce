//! Library side of the `xy3` command-line tool: argument handling, the four
//! commands and their CSV/JSON renderings.

pub mod commands;
pub mod config;
pub mod verify;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use config::{Command, Format, RunConfig};

/// Process exit status of a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    CheckFailed,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::CheckFailed => 1,
        }
    }
}

fn render<T: Serialize>(format: Format, value: &T, csv: impl FnOnce(&T) -> String) -> Result<String> {
    Ok(match format {
        Format::Csv => csv(value),
        Format::Json => serde_json::to_string_pretty(value)? + "\n",
    })
}

/// Writes `body` to `path`, or to standard output when no path is given.
pub fn emit(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Runs one command end to end, writing its artifact.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let out = cfg.output_path.as_deref();
    match cfg.command {
        Command::Times => {
            let table = commands::cmd_times(cfg);
            emit(out, &render(cfg.format, &table, |t| t.to_csv())?)?;
            Ok(Outcome::Success)
        }
        Command::Trace => {
            let artifact = commands::cmd_trace(cfg)?;
            emit(out, &render(cfg.format, &artifact, |a| a.to_csv())?)?;
            Ok(Outcome::Success)
        }
        Command::Compile => {
            let report = commands::cmd_compile(cfg)?;
            if out.is_none() {
                emit(None, &(serde_json::to_string_pretty(&report)? + "\n"))?;
            }
            Ok(if report.passed { Outcome::Success } else { Outcome::CheckFailed })
        }
        Command::Verify => {
            let summary = verify::Verifier::default().run(&cfg.lambdas);
            let body = match cfg.format {
                Format::Csv => summary.to_csv(),
                Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
            };
            emit(out, &body)?;
            if !summary.passed {
                eprintln!("failed checks: {}", summary.failures.join(", "));
            }
            Ok(if summary.passed { Outcome::Success } else { Outcome::CheckFailed })
        }
    }
}
