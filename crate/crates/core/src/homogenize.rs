//! Cell averages, the effective conductivity tensor and the Maxwell formula.
//!
//! The average gradient follows from the mean value property of the
//! inclusion potentials,
//!
//! ```text
//! T1 - i T2 = -A e^{-iθ} / λ_m - 2π Σ_k ρ_k r_k² ψ_k(a_k)
//! ```
//!
//! while the average flux equals the imposed `(-A cos θ, -A sin θ)`. The
//! tensor is fitted to `<q> = Λ <∇T>` from the loadings `θ = 0` and `θ = π/2`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::fields::{AuxiliarySolution, FieldError, FullSolution, Loading};
use crate::geometry::CellConfig;
use crate::solver::Truncation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HomogenizeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("average gradient matrix is singular (determinant {0:e})")]
    SingularGradient(f64),
    #[error("Maxwell formula needs |ρν| < 1 and ν >= 0, got ρ = {rho}, ν = {nu}")]
    MaxwellDomain { nu: f64, rho: f64 },
    #[error("loading intensity must be non-zero and finite")]
    ZeroIntensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveTensor {
    pub xx: f64,
    pub xy: f64,
    pub yx: f64,
    pub yy: f64,
}

impl EffectiveTensor {
    pub fn isotropic(value: f64) -> Self {
        Self {
            xx: value,
            xy: 0.0,
            yx: 0.0,
            yy: value,
        }
    }

    pub fn asymmetry(&self) -> f64 {
        (self.xy - self.yx).abs()
    }

    pub fn max_abs_difference(&self, other: &EffectiveTensor) -> f64 {
        [
            self.xx - other.xx,
            self.xy - other.xy,
            self.yx - other.yx,
            self.yy - other.yy,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Applies the tensor to a gradient.
    pub fn apply(&self, g: (f64, f64)) -> (f64, f64) {
        (self.xx * g.0 + self.xy * g.1, self.yx * g.0 + self.yy * g.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragePair {
    pub avg_flux: (f64, f64),
    pub avg_gradient: (f64, f64),
}

pub fn average_pair(full: &FullSolution<'_>) -> AveragePair {
    let cfg = &full.aux.config;
    let Loading { intensity, angle } = full.loading;
    let lm = cfg.matrix_conductivity;
    let mut g = -intensity * Complex64::from_polar(1.0, -angle) / lm;
    for (k, inc) in cfg.inclusions.iter().enumerate() {
        let rho = cfg.contrast(k);
        g -= 2.0 * std::f64::consts::PI * rho * inc.radius * inc.radius * full.inclusion_center_value(k);
    }
    AveragePair {
        avg_flux: (-intensity * angle.cos(), -intensity * angle.sin()),
        avg_gradient: (g.re, -g.im),
    }
}

/// Tensor `Λ` with `<q> = Λ <∇T>`, from loadings at `θ = 0` and `θ = π/2`.
pub fn effective_tensor(aux: &AuxiliarySolution, intensity: f64) -> Result<EffectiveTensor, HomogenizeError> {
    if intensity == 0.0 || !intensity.is_finite() {
        return Err(HomogenizeError::ZeroIntensity);
    }
    let px = average_pair(&aux.with_loading(Loading::new(intensity, 0.0))?);
    let py = average_pair(&aux.with_loading(Loading::new(intensity, FRAC_PI_2))?);
    // Λ G = Q with the columns of G, Q the two loadings
    let (g11, g21) = px.avg_gradient;
    let (g12, g22) = py.avg_gradient;
    let (q11, q21) = px.avg_flux;
    let (q12, q22) = py.avg_flux;
    let det = g11 * g22 - g12 * g21;
    let scale = (g11.abs() + g12.abs()) * (g21.abs() + g22.abs());
    if det.abs() <= 1e-14 * scale || !det.is_finite() {
        return Err(HomogenizeError::SingularGradient(det));
    }
    let (i11, i12, i21, i22) = (g22 / det, -g12 / det, -g21 / det, g11 / det);
    Ok(EffectiveTensor {
        xx: q11 * i11 + q12 * i21,
        xy: q11 * i12 + q12 * i22,
        yx: q21 * i11 + q22 * i21,
        yy: q21 * i12 + q22 * i22,
    })
}

/// Maxwell's dilute estimate `(1 + ρν) / (1 - ρν)` for unit matrix conductivity.
pub fn maxwell_lambda(nu: f64, rho: f64) -> Result<f64, HomogenizeError> {
    let x = rho * nu;
    if !(nu >= 0.0 && x.abs() < 1.0) {
        return Err(HomogenizeError::MaxwellDomain { nu, rho });
    }
    Ok((1.0 + x) / (1.0 - x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub nu: f64,
    /// Largest inclusion diameter over the smallest gap between disks.
    pub d_over_d: f64,
    pub tensor: EffectiveTensor,
    /// `λ_e = Λ_xx`.
    pub lambda_e: f64,
    pub lambda_maxwell: f64,
    /// `(λ_e - λ_e^M) / λ_e`.
    pub delta_lambda: f64,
    /// `(λ_e - λ_e^M) / ν²`, absent for `ν = 0`.
    pub remainder_over_nu2: Option<f64>,
}

pub fn compare_report(
    config: &CellConfig,
    trunc: &Truncation,
    intensity: f64,
) -> Result<ComparisonRecord, HomogenizeError> {
    let aux = AuxiliarySolution::solve(config, trunc)?;
    compare_solution(&aux, intensity)
}

/// Comparison record for an already solved cell.
///
/// With unequal inclusion conductivities the Maxwell value uses `Σ ρ_k ν_k`
/// in place of `ρν`.
pub fn compare_solution(aux: &AuxiliarySolution, intensity: f64) -> Result<ComparisonRecord, HomogenizeError> {
    let cfg = &aux.config;
    let lm = cfg.matrix_conductivity;
    let tensor = effective_tensor(aux, intensity)?;
    let nu = cfg.volume_fraction();
    let rho_nu: f64 = cfg
        .inclusions
        .iter()
        .enumerate()
        .map(|(k, inc)| cfg.contrast(k) * std::f64::consts::PI * inc.radius * inc.radius)
        .sum();
    let (rho, nu_eff) = if nu > 0.0 { (rho_nu / nu, nu) } else { (0.0, 0.0) };
    let lambda_maxwell = lm * maxwell_lambda(nu_eff, rho)?;
    let lambda_e = tensor.xx;
    let diameter = cfg
        .inclusions
        .iter()
        .map(|i| 2.0 * i.radius)
        .fold(0.0, f64::max);
    let d_over_d = match cfg.min_gap() {
        Some(gap) => diameter / gap,
        None => 0.0,
    };
    Ok(ComparisonRecord {
        nu,
        d_over_d,
        tensor,
        lambda_e,
        lambda_maxwell,
        delta_lambda: (lambda_e - lambda_maxwell) / lambda_e,
        remainder_over_nu2: (nu > 0.0).then(|| (lambda_e - lambda_maxwell) / (nu * nu)),
    })
}
