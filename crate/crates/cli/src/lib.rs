//! Command-line front end: JSON configurations in, JSON reports and CSV
//! field grids out.

pub mod commands;
pub mod config;
pub mod format;

use std::fs;
use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use dpheat::geometry::ValidationReport;
use thiserror::Error;

pub use config::{parse_config, render, Grid, RunConfig, TruncationSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("invalid configuration at {pointer:?}: {message}")]
    Parse { pointer: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("invalid cell:\n{report}")]
    Validation { report: ValidationReport, output: String },
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn numeric(e: impl std::fmt::Display) -> Self {
        CliError::Numeric(e.to_string())
    }

    /// 1 for anything wrong with the input, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Numeric(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dpheat", version, about = "Effective conductivity of doubly periodic disk composites")]
pub struct Cli {
    /// Truncation order M (overrides the configuration).
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Gauss-Legendre points for the edge integrals (overrides the configuration).
    #[arg(long, global = true)]
    pub quadrature: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Read the loading angle in degrees.
    #[arg(long, global = true)]
    pub degrees: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the cell geometry and conductivities.
    Validate { config: PathBuf },
    /// Effective conductivity tensor and Maxwell comparison.
    Effective { config: PathBuf },
    /// Flux and temperature on a grid of cell points, as CSV.
    Field { config: PathBuf },
    /// Boundary residuals and edge-integral diagnostics.
    Residual { config: PathBuf },
    /// Maxwell estimate from a configuration or from --nu and --rho.
    Maxwell {
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "config", requires = "rho")]
        nu: Option<f64>,
        #[arg(long, conflicts_with = "config", requires = "nu")]
        rho: Option<f64>,
    },
}

fn read_config(path: &PathBuf, cli: &Cli) -> Result<RunConfig, CliError> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|source| CliError::Read { path: "stdin".into(), source })?;
        s
    } else {
        fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.display().to_string(),
            source,
        })?
    };
    let mut config = parse_config(&text)?;
    if let Some(order) = cli.order {
        config.truncation.order = order;
    }
    if let Some(q) = cli.quadrature {
        config.truncation.quadrature_points = q;
    }
    if cli.degrees {
        config.loading.angle = config.loading.angle.to_radians();
    }
    Ok(config)
}

/// Runs the command and returns the text to emit.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Validate { config } => commands::validate_text(&read_config(config, cli)?),
        Command::Effective { config } => commands::effective_text(&read_config(config, cli)?),
        Command::Field { config } => commands::field(&read_config(config, cli)?),
        Command::Residual { config } => commands::residual_text(&read_config(config, cli)?),
        Command::Maxwell { config, nu, rho } => {
            let report = match (config, nu, rho) {
                (Some(path), _, _) => commands::maxwell_from_config(&read_config(path, cli)?)?,
                (None, Some(nu), Some(rho)) => commands::maxwell(*nu, *rho, 1.0)?,
                _ => {
                    return Err(CliError::Invalid(
                        "maxwell needs a configuration or both --nu and --rho".into(),
                    ))
                }
            };
            Ok(commands::maxwell_text(&report))
        }
    }
}

pub fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
