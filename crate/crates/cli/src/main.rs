//! `flatzone`: transform tables, shooting profiles, boundary-value solves,
//! threshold estimates and λ-sweeps for `−Δu + h(u)|∇u|² = λ f`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;
mod emit;

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::commands::Output;
use crate::config::{parse_range, Common, Resolved};

#[derive(Debug, Parser)]
#[command(name = "flatzone", version, about = "Flat solutions of singular quasilinear elliptic problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate H, psi on [0, sigma) and g, g' on [0, L).
    #[command(allow_negative_numbers = true)]
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Profile of the Cauchy problem started at ell (default L).
    #[command(allow_negative_numbers = true)]
    Shoot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        ell: Option<f64>,
        /// Length of a flat segment in front of the profile.
        #[arg(long, default_value_t = 0.0)]
        plateau: f64,
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Solve the boundary-value problem and run the diagnostics.
    #[command(allow_negative_numbers = true)]
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: f64,
    },
    /// Eigenvalue, linear bounds, certificates and the extremal parameter.
    #[command(allow_negative_numbers = true)]
    Threshold {
        #[command(flatten)]
        common: Common,
    },
    /// One solve per lambda in A:B:STEP.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long = "lambda-range")]
        lambda_range: String,
    },
}

/// A failure with its exit code and whatever should still be written.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
    report: Option<Value>,
    csv: Option<String>,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into(), report: None, csv: None }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into(), report: None, csv: None }
    }

    pub fn from_core(e: flatzone_core::Error) -> Self {
        use flatzone_core::Error as E;
        let mut err = match &e {
            E::Domain { .. } | E::InvalidParameter(_) | E::Precondition(_) => CliError::config(e.to_string()),
            E::Inapplicable(_) | E::NoConvergence(_) => CliError::numerical(e.to_string()),
        };
        if let E::NoConvergence(f) = &e {
            err.report = Some(json!({
                "what": f.what,
                "iterations": f.iterations,
                "residual": emit::jnum(f.residual),
            }));
        }
        err
    }

    /// Serialize numerical failures into a report carrying the config.
    pub fn with_report(mut self, config: &Value) -> Self {
        if self.code == 3 {
            let mut body = serde_json::Map::new();
            body.insert("status".into(), json!("failed"));
            body.insert("error".into(), json!(self.message));
            if let Some(Value::Object(detail)) = self.report.take() {
                body.extend(detail);
            }
            self.report = Some(emit::report(config, body));
        }
        self
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

fn write_artifact(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

fn emit(common: &Common, out: &Output) -> io::Result<()> {
    if let Some(csv) = &out.csv {
        write_artifact(common.out.as_deref(), csv)?;
    }
    if let Some(v) = &out.json {
        write_artifact(common.report.as_deref(), &json_text(v))?;
    }
    Ok(())
}

fn run(command: Command) -> Result<(Common, Output), (Option<Common>, CliError)> {
    let common = match &command {
        Command::Transform { common, .. }
        | Command::Shoot { common, .. }
        | Command::Solve { common, .. }
        | Command::Threshold { common }
        | Command::Sweep { common, .. } => common.clone(),
    };
    let resolved = Resolved::new(common.clone()).map_err(|e| (None, e))?;
    let mut resolved = resolved;
    let result = match command {
        Command::Transform { samples, .. } => {
            resolved.extra.insert("samples".into(), json!(samples));
            commands::transform(&resolved, samples)
        }
        Command::Shoot { lambda, ell, plateau, samples, .. } => {
            resolved.extra.insert("lambda".into(), json!(lambda));
            resolved.extra.insert("ell".into(), json!(ell));
            resolved.extra.insert("plateau".into(), json!(plateau));
            resolved.extra.insert("samples".into(), json!(samples));
            commands::shoot(&resolved, lambda, ell, plateau, samples)
        }
        Command::Solve { lambda, .. } => {
            resolved.extra.insert("lambda".into(), json!(lambda));
            commands::solve(&resolved, lambda)
        }
        Command::Threshold { .. } => commands::threshold(&resolved),
        Command::Sweep { lambda_range, .. } => parse_range(&lambda_range).and_then(|lambdas| {
            resolved.extra.insert("lambda_range".into(), json!(lambda_range));
            commands::sweep(&resolved, &lambdas)
        }),
    };
    match result {
        Ok(out) => Ok((common, out)),
        Err(e) => Err((Some(common), e)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((common, out)) => match emit(&common, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: writing output: {e}");
                ExitCode::from(2)
            }
        },
        Err((common, err)) => {
            eprintln!("error: {}", err.message);
            if let Some(common) = common.filter(|_| err.code == 3) {
                let out = Output { csv: err.csv.clone(), json: err.report.clone() };
                if let Err(e) = emit(&common, &out) {
                    eprintln!("error: writing failure report: {e}");
                }
            }
            ExitCode::from(err.code)
        }
    }
}
