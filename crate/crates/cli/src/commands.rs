//! Subcommand bodies. Each returns the text written to the output.

use dpheat::fields::{AuxiliarySolution, FullSolution, Side};
use dpheat::geometry::{CellConfig, Region, ValidationReport, Violation, BOUNDARY_TOL};
use dpheat::homogenize::{compare_solution, maxwell_lambda, EffectiveTensor};
use dpheat::solver::ProblemTag;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::format::sig;
use crate::CliError;

const TAGS: [(ProblemTag, &str); 2] = [(ProblemTag::Base, "base"), (ProblemTag::Rotated, "rotated")];

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

#[derive(Debug, Serialize)]
pub struct ValidateReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub messages: Vec<String>,
}

pub fn validate(config: &RunConfig) -> (ValidateReport, ValidationReport) {
    let report = config.cell().validate();
    let out = ValidateReport {
        valid: report.is_ok(),
        violations: report.violations.clone(),
        messages: report.violations.iter().map(|v| v.to_string()).collect(),
    };
    (out, report)
}

pub fn validate_text(config: &RunConfig) -> Result<String, CliError> {
    let (out, report) = validate(config);
    if report.is_ok() {
        Ok(to_json(&out))
    } else {
        Err(CliError::Validation { report, output: to_json(&out) })
    }
}

/// Checks the configuration and solves both auxiliary problems.
pub fn solve(config: &RunConfig) -> Result<AuxiliarySolution, CliError> {
    config.check()?;
    let cell = config.cell();
    let report = cell.validate();
    if !report.is_ok() {
        let output = to_json(&validate(config).0);
        return Err(CliError::Validation { report, output });
    }
    AuxiliarySolution::solve(&cell, &config.truncation()).map_err(CliError::numeric)
}

#[derive(Debug, Serialize)]
pub struct EffectiveReport {
    pub tensor: EffectiveTensor,
    pub nu: f64,
    pub maxwell: f64,
    pub delta_lambda: f64,
    pub remainder_over_nu2: Option<f64>,
    pub d_over_d: f64,
    pub residual_sup: f64,
    #[serde(rename = "M")]
    pub order: usize,
}

pub fn effective(config: &RunConfig) -> Result<EffectiveReport, CliError> {
    let aux = solve(config)?;
    let rec = compare_solution(&aux, config.loading.intensity).map_err(CliError::numeric)?;
    let mut residual_sup: f64 = 0.0;
    for (tag, _) in TAGS {
        residual_sup = residual_sup.max(aux.boundary_residual(tag).map_err(CliError::numeric)?);
    }
    Ok(EffectiveReport {
        tensor: rec.tensor,
        nu: rec.nu,
        maxwell: rec.lambda_maxwell,
        delta_lambda: rec.delta_lambda,
        remainder_over_nu2: rec.remainder_over_nu2,
        d_over_d: rec.d_over_d,
        residual_sup,
        order: config.truncation.order,
    })
}

#[derive(Debug, Serialize)]
pub struct ProblemDiagnostics {
    pub tag: &'static str,
    /// Boundary defect sup-norm, one entry per inclusion.
    pub residuals: Vec<f64>,
    pub residual_sup: f64,
    pub im_edge_integral: f64,
    pub edge_integral_quadrature: f64,
    pub edge_integral_closed_form: f64,
    pub edge_integral_gap: f64,
}

#[derive(Debug, Serialize)]
pub struct ResidualReport {
    #[serde(rename = "M")]
    pub order: usize,
    pub problems: Vec<ProblemDiagnostics>,
}

pub fn residual(config: &RunConfig) -> Result<ResidualReport, CliError> {
    let aux = solve(config)?;
    let mut problems = Vec::new();
    for (tag, name) in TAGS {
        let residuals = aux.boundary_residuals(tag).map_err(CliError::numeric)?;
        let quadrature = match tag {
            ProblemTag::Base => aux.edge_integral_i,
            ProblemTag::Rotated => aux.edge_integral_i_perp,
        };
        let closed = aux.edge_integral_closed_form(tag);
        problems.push(ProblemDiagnostics {
            tag: name,
            residual_sup: residuals.iter().copied().fold(0.0, f64::max),
            residuals,
            im_edge_integral: aux.im_edge_integral(tag).map_err(CliError::numeric)?,
            edge_integral_quadrature: quadrature,
            edge_integral_closed_form: closed,
            edge_integral_gap: (quadrature - closed).abs(),
        });
    }
    Ok(ResidualReport {
        order: config.truncation.order,
        problems,
    })
}

#[derive(Debug, Serialize)]
pub struct MaxwellReport {
    pub nu: f64,
    pub rho: f64,
    pub maxwell: f64,
}

/// Maxwell estimate from `ν` and `ρ`, scaled by the matrix conductivity.
pub fn maxwell(nu: f64, rho: f64, matrix_conductivity: f64) -> Result<MaxwellReport, CliError> {
    let value = maxwell_lambda(nu, rho).map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(MaxwellReport {
        nu,
        rho,
        maxwell: matrix_conductivity * value,
    })
}

/// `ν` and the volume-weighted contrast of a cell.
pub fn maxwell_inputs(cell: &CellConfig) -> (f64, f64) {
    let nu = cell.volume_fraction();
    if nu == 0.0 {
        return (0.0, 0.0);
    }
    let rho_nu: f64 = cell
        .inclusions
        .iter()
        .enumerate()
        .map(|(k, inc)| cell.contrast(k) * std::f64::consts::PI * inc.radius * inc.radius)
        .sum();
    (nu, rho_nu / nu)
}

pub fn maxwell_from_config(config: &RunConfig) -> Result<MaxwellReport, CliError> {
    let cell = config.cell();
    let report = cell.validate();
    if !report.is_ok() {
        let output = to_json(&validate(config).0);
        return Err(CliError::Validation { report, output });
    }
    let (nu, rho) = maxwell_inputs(&cell);
    maxwell(nu, rho, cell.matrix_conductivity)
}

/// Region label used in the field CSV: `matrix` or `inc<k>` with 1-based `k`.
fn region_label(region: Region) -> String {
    match region {
        Region::Matrix => "matrix".into(),
        Region::Inclusion(k) | Region::Boundary(k) => format!("inc{}", k + 1),
    }
}

fn field_point(full: &FullSolution<'_>, z: Complex64) -> Result<String, CliError> {
    let region = full.aux.config.locate(z, BOUNDARY_TOL).region;
    let side = match region {
        Region::Matrix => Side::Matrix,
        _ => Side::Inclusion,
    };
    let (qx, qy) = full.flux(z, Some(side)).map_err(CliError::numeric)?;
    let t = full.temperature(z, Some(side)).map_err(CliError::numeric)?;
    Ok(format!(
        "{},{},{},{},{},{}",
        sig(z.re, 9),
        sig(z.im, 9),
        region_label(region),
        sig(qx, 9),
        sig(qy, 9),
        sig(t, 9)
    ))
}

pub fn field(config: &RunConfig) -> Result<String, CliError> {
    let grid = config
        .grid
        .ok_or_else(|| CliError::Invalid("the field command needs a \"grid\" entry".into()))?;
    let aux = solve(config)?;
    let full = aux.with_loading(config.loading).map_err(CliError::numeric)?;
    let rows: Vec<String> = (0..grid.ny)
        .into_par_iter()
        .map(|j| {
            let y = (j as f64 + 0.5) / grid.ny as f64 - 0.5;
            let mut row = String::new();
            for i in 0..grid.nx {
                let x = (i as f64 + 0.5) / grid.nx as f64 - 0.5;
                row.push_str(&field_point(&full, Complex64::new(x, y))?);
                row.push('\n');
            }
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    let mut out = String::from("x,y,region,Qx,Qy,T\n");
    for row in rows {
        out.push_str(&row);
    }
    Ok(out)
}

pub fn effective_text(config: &RunConfig) -> Result<String, CliError> {
    Ok(to_json(&effective(config)?))
}

pub fn residual_text(config: &RunConfig) -> Result<String, CliError> {
    Ok(to_json(&residual(config)?))
}

pub fn maxwell_text(report: &MaxwellReport) -> String {
    to_json(report)
}
