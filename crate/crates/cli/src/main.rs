// Copyright 2026 The Lightstore Authors
// SPDX-License-Identifier: Apache-2.0

//! `lightstore`: run scenario files and check them against goldens.
//!
//! Exit codes: 0 success, 1 golden mismatch or I/O failure, 2 invalid
//! scenario, 3 numerical failure.

mod run;
mod scenario;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::scenario::{Kind, ScenarioFile};

/// Overrides the directory that relative `output` paths resolve against.
pub const OUTPUT_ROOT_ENV: &str = "LIGHTSTORE_OUTPUT_ROOT";

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn context(self, what: &str) -> Self {
        match self {
            Failure::Validation(m) => Failure::Validation(format!("{what}: {m}")),
            Failure::Numerical(m) => Failure::Numerical(format!("{what}: {m}")),
            Failure::Io(m) => Failure::Io(format!("{what}: {m}")),
        }
    }
}

impl From<lightstore::Error> for Failure {
    fn from(e: lightstore::Error) -> Self {
        use lightstore::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter(_)
            | E::Cfl { .. }
            | E::StiffStep { .. }
            | E::LengthMismatch { .. }
            | E::DerivativeUndefined { .. }
            | E::UndefinedAngle
            | E::BoundOverflow(_)
            | E::TooFewTrials { .. } => Failure::Validation(msg),
            E::Singularity { .. }
            | E::NonFinite { .. }
            | E::DivergentDelay { .. }
            | E::WindowMass { .. }
            | E::StepTooLarge { .. }
            | E::Sampling(_) => Failure::Numerical(msg),
            E::Io(_) | E::Json(_) => Failure::Io(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "lightstore", version, about = "Dark-state polariton light storage scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files; several files run in parallel.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Re-run the goldens in a directory and compare their metrics.
    Verify {
        dir: PathBuf,
        /// Rewrite stored values from the current build instead of comparing.
        #[arg(long)]
        bless: bool,
        /// Relative tolerance for metrics that have none stored yet.
        #[arg(long, default_value_t = 0.02, requires = "bless")]
        rel_tol: f64,
        /// Absolute tolerance for metrics that have none stored yet.
        #[arg(long, default_value_t = 1e-6, requires = "bless")]
        abs_tol: f64,
    },
    /// List the scenario kinds.
    ListScenarios,
}

fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn run_files(files: &[PathBuf]) -> u8 {
    let root = output_root();
    let results: Vec<Result<PathBuf, Failure>> = std::thread::scope(|scope| {
        let handles: Vec<_> = files
            .iter()
            .map(|path| {
                let root = &root;
                scope.spawn(move || {
                    let file = ScenarioFile::load(path)?;
                    run::run_scenario(&file, root).map_err(|e| e.context(&path.display().to_string()))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario worker panicked")).collect()
    });
    let mut code = 0;
    for r in results {
        match r {
            Ok(dir) => println!("wrote {}", dir.display()),
            Err(e) => {
                eprintln!("error: {e}");
                code = code.max(e.code());
            }
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { files } => run_files(&files),
        Command::Verify { dir, bless, rel_tol, abs_tol } => {
            let bless = bless.then_some(verify::Bless { rel_tol, abs_tol });
            match verify::verify(&dir, bless) {
                Ok(outcomes) => {
                    let mut failed = 0;
                    for o in &outcomes {
                        if o.problems.is_empty() {
                            println!("PASS {}", o.name);
                        } else {
                            failed += 1;
                            println!("FAIL {}: {}", o.name, o.problems.join("; "));
                        }
                    }
                    println!("{} of {} goldens passed", outcomes.len() - failed, outcomes.len());
                    u8::from(failed > 0)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.code()
                }
            }
        }
        Command::ListScenarios => {
            for k in Kind::ALL {
                println!("{:<20} {}", k.name(), k.summary());
            }
            0
        }
    };
    ExitCode::from(code)
}
