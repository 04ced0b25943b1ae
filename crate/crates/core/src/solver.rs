//! Truncated functional-equation system for the Taylor coefficients of the
//! inclusion potentials.
//!
//! For inclusion `k` the potential is expanded about its center,
//! `ψ_k(z) = Σ_j ψ_jk (z - a_k)^j`, `j = 0..=M`. Collecting like powers gives
//!
//! ```text
//! ψ_jk = Σ_m Σ_l ρ_m r_m^{2(l+1)} (-1)^j C(l+j+1, j) G_{l+j+2}(a_k - a_m) conj(ψ_lm) + s δ_j0
//! ```
//!
//! with `G = E` for `m != k`, `G = σ(0)` for `m = k`, and `s = ±1` the
//! right-hand side of the auxiliary problem. The unknowns appear conjugated,
//! so the system is real-linear; it is solved as a real system of size
//! `2N(M+1)` with `(Re ψ, Im ψ)` interleaved.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elliptic::{EllipticError, LatticeConstants};
use crate::geometry::{CellConfig, Inclusion, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub order: usize,
    pub quadrature_points: usize,
    pub boundary_samples: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            order: 4,
            quadrature_points: 64,
            boundary_samples: 64,
        }
    }
}

impl Truncation {
    pub fn with_order(order: usize) -> Self {
        Self {
            order,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), SolverError> {
        if self.quadrature_points < 8 {
            return Err(SolverError::Truncation(format!(
                "quadrature_points must be at least 8, got {}",
                self.quadrature_points
            )));
        }
        if self.boundary_samples < 16 {
            return Err(SolverError::Truncation(format!(
                "boundary_samples must be at least 16, got {}",
                self.boundary_samples
            )));
        }
        Ok(())
    }
}

/// Which auxiliary problem a coefficient set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemTag {
    /// Flux along x, inclusion potentials normalised to `+1`.
    Base,
    /// Quarter-turned geometry, inclusion potentials normalised to `-1`.
    Rotated,
}

impl ProblemTag {
    pub fn rhs_sign(self) -> f64 {
        match self {
            ProblemTag::Base => 1.0,
            ProblemTag::Rotated => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration:\n{0}")]
    InvalidConfig(ValidationReport),
    #[error("invalid truncation: {0}")]
    Truncation(String),
    #[error("inclusions {} and {} have coincident centers", .0 + 1, .1 + 1)]
    CoincidentCenters(usize, usize),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("system matrix is numerically singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },
    #[error("successive approximation did not converge after {iterations} iterations (last change {last_change:.3e})")]
    NotConverged { iterations: usize, last_change: f64 },
}

/// Coefficients `ψ_jk`, stored row-major by inclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub tag: ProblemTag,
    order: usize,
    coefficients: Vec<Complex64>,
}

impl CoefficientSet {
    pub fn new(tag: ProblemTag, order: usize, coefficients: Vec<Complex64>) -> Self {
        assert_eq!(coefficients.len() % (order + 1), 0);
        Self {
            tag,
            order,
            coefficients,
        }
    }

    /// The exact solution for a composite without contrast.
    pub fn trivial(tag: ProblemTag, n_inclusions: usize, order: usize) -> Self {
        let mut coefficients = vec![Complex64::new(0.0, 0.0); n_inclusions * (order + 1)];
        for k in 0..n_inclusions {
            coefficients[k * (order + 1)] = Complex64::new(tag.rhs_sign(), 0.0);
        }
        Self::new(tag, order, coefficients)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_inclusions(&self) -> usize {
        self.coefficients.len() / (self.order + 1)
    }

    /// `ψ_jk` for inclusion `k` and Taylor order `j`.
    pub fn get(&self, k: usize, j: usize) -> Complex64 {
        self.coefficients[k * (self.order + 1) + j]
    }

    /// The coefficients of inclusion `k`, `j = 0..=M`.
    pub fn inclusion(&self, k: usize) -> &[Complex64] {
        let w = self.order + 1;
        &self.coefficients[k * w..(k + 1) * w]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn max_abs_difference(&self, other: &CoefficientSet) -> f64 {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// The quarter-turned geometry `b_k = -i a_k` used by the rotated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedGeometry {
    pub centers: Vec<Complex64>,
    pub radii: Vec<f64>,
    pub conductivities: Vec<f64>,
}

impl RotatedGeometry {
    pub fn new(config: &CellConfig) -> Self {
        let centers = config
            .inclusions
            .iter()
            .map(|inc| reduce_to_cell(Complex64::new(0.0, -1.0) * inc.center).0)
            .collect();
        Self {
            centers,
            radii: config.inclusions.iter().map(|i| i.radius).collect(),
            conductivities: config.inclusions.iter().map(|i| i.conductivity).collect(),
        }
    }

    /// The rotated geometry as a cell with the original matrix conductivity.
    pub fn to_config(&self, matrix_conductivity: f64) -> CellConfig {
        let inclusions = self
            .centers
            .iter()
            .zip(&self.radii)
            .zip(&self.conductivities)
            .map(|((&c, &r), &l)| Inclusion::new(c, r, l))
            .collect();
        CellConfig::new(matrix_conductivity, inclusions)
    }
}

/// Maps `z` to `z - w` in the cell `[-1/2, 1/2)^2`, returning the integer shift `w`.
pub(crate) fn reduce_to_cell(z: Complex64) -> (Complex64, (i64, i64)) {
    let m1 = (z.re + 0.5).floor();
    let m2 = (z.im + 0.5).floor();
    (z - Complex64::new(m1, m2), (m1 as i64, m2 as i64))
}

/// The fixed-point form `ψ = A conj(ψ) + b` and its real counterpart.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub tag: ProblemTag,
    pub order: usize,
    pub n_inclusions: usize,
    /// Complex coupling `A` acting on `conj(ψ)`.
    pub coupling: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
    /// `r_k^j` per unknown; `ψ_jk r_k^j` are the well-scaled unknowns.
    pub scales: DVector<f64>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Real matrix of `ψ - A conj(ψ) = b` with unknowns `(Re ψ, Im ψ)` interleaved.
    pub fn real_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::<f64>::identity(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                let a = self.coupling[(r, c)];
                // A conj(ψ) = (Ar x + Ai y) + i (Ai x - Ar y)
                m[(2 * r, 2 * c)] -= a.re;
                m[(2 * r, 2 * c + 1)] -= a.im;
                m[(2 * r + 1, 2 * c)] -= a.im;
                m[(2 * r + 1, 2 * c + 1)] += a.re;
            }
        }
        m
    }

    /// The same system in the unknowns `ψ_jk r_k^j`.
    pub fn rescaled(&self) -> LinearSystem {
        let d = &self.scales;
        let coupling = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            self.coupling[(r, c)] * (d[r] / d[c])
        });
        let rhs = DVector::from_fn(self.dim(), |r, _| self.rhs[r] * d[r]);
        LinearSystem {
            coupling,
            rhs,
            scales: DVector::from_element(self.dim(), 1.0),
            ..self.clone()
        }
    }

    pub fn real_rhs(&self) -> DVector<f64> {
        DVector::from_fn(2 * self.dim(), |i, _| {
            let b = self.rhs[i / 2];
            if i % 2 == 0 {
                b.re
            } else {
                b.im
            }
        })
    }
}

pub fn assemble_system(
    config: &CellConfig,
    order: usize,
    constants: &LatticeConstants,
    tag: ProblemTag,
) -> Result<LinearSystem, SolverError> {
    let n = config.inclusions.len();
    let w = order + 1;
    let dim = n * w;
    let p_max = 2 * order + 2;
    let mut coupling = DMatrix::<Complex64>::zeros(dim, dim);
    let mut rhs = DVector::<Complex64>::zeros(dim);
    let mut scales = DVector::<f64>::from_element(dim, 1.0);

    // C(l+j+1, j) for l, j <= M
    let mut binom = vec![vec![0.0; w]; w];
    for (l, row) in binom.iter_mut().enumerate() {
        let mut b = 1.0;
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = b;
            b *= (l + j + 2) as f64 / (j + 1) as f64;
        }
    }

    for k in 0..n {
        rhs[k * w] = Complex64::new(tag.rhs_sign(), 0.0);
        let rk = config.inclusions[k].radius;
        for j in 1..w {
            scales[k * w + j] = scales[k * w + j - 1] * rk;
        }
        for m in 0..n {
            let inc = &config.inclusions[m];
            let rho = config.contrast(m);
            if rho == 0.0 {
                continue;
            }
            let g = if m == k {
                constants.sigma_upto(p_max, Complex64::new(0.0, 0.0))?
            } else {
                let d = config.inclusions[k].center - inc.center;
                if d.norm() == 0.0 {
                    return Err(SolverError::CoincidentCenters(m.min(k), m.max(k)));
                }
                constants.eisenstein_upto(p_max, d)?
            };
            let r2 = inc.radius * inc.radius;
            let mut r_pow = r2;
            for l in 0..w {
                let weight = rho * r_pow;
                for j in 0..w {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    coupling[(k * w + j, m * w + l)] = g[l + j + 2] * (weight * sign * binom[l][j]);
                }
                r_pow *= r2;
            }
        }
    }

    Ok(LinearSystem {
        tag,
        order,
        n_inclusions: n,
        coupling,
        rhs,
        scales,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolveMode {
    Direct,
    /// Fixed-point iteration `ψ ← A conj(ψ) + b` from `ψ_0k = ±1`.
    SuccessiveApproximation { max_iterations: usize, tolerance: f64 },
}

impl SolveMode {
    pub fn successive() -> Self {
        SolveMode::SuccessiveApproximation {
            max_iterations: 10_000,
            tolerance: 1e-14,
        }
    }
}

pub fn solve_coefficients(system: &LinearSystem, mode: SolveMode) -> Result<CoefficientSet, SolverError> {
    if system.dim() == 0 {
        return Ok(CoefficientSet::new(system.tag, system.order, Vec::new()));
    }
    let coefficients = match mode {
        SolveMode::Direct => solve_direct(system)?,
        SolveMode::SuccessiveApproximation {
            max_iterations,
            tolerance,
        } => solve_iterative(system, max_iterations, tolerance)?,
    };
    Ok(CoefficientSet::new(system.tag, system.order, coefficients))
}

fn solve_direct(system: &LinearSystem) -> Result<Vec<Complex64>, SolverError> {
    let scaled = system.rescaled();
    let matrix = scaled.real_matrix();
    let rhs = scaled.real_rhs();
    let singular = || SolverError::Singular {
        condition: condition_estimate(&matrix),
    };
    let x = matrix.clone().lu().solve(&rhs).ok_or_else(singular)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(singular());
    }
    if condition_estimate(&matrix) > 1e14 {
        return Err(singular());
    }
    Ok((0..system.dim())
        .map(|i| Complex64::new(x[2 * i], x[2 * i + 1]) / system.scales[i])
        .collect())
}

fn condition_estimate(matrix: &DMatrix<f64>) -> f64 {
    if matrix.nrows() == 0 {
        return 1.0;
    }
    let sv = matrix.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn solve_iterative(
    system: &LinearSystem,
    max_iterations: usize,
    tolerance: f64,
) -> Result<Vec<Complex64>, SolverError> {
    let mut psi = system.rhs.clone();
    let mut last_change = f64::INFINITY;
    for _ in 0..max_iterations {
        let next = &system.coupling * psi.map(|v| v.conj()) + &system.rhs;
        last_change = (&next - &psi).iter().map(|v| v.norm()).fold(0.0, f64::max);
        psi = next;
        if !last_change.is_finite() {
            break;
        }
        if last_change <= tolerance {
            return Ok(psi.iter().copied().collect());
        }
    }
    Err(SolverError::NotConverged {
        iterations: max_iterations,
        last_change,
    })
}

/// Solves the base problem on `config` and the rotated problem on its
/// quarter-turned geometry.
pub fn solve_auxiliary_pair(
    config: &CellConfig,
    trunc: &Truncation,
    constants: &LatticeConstants,
) -> Result<(CoefficientSet, CoefficientSet), SolverError> {
    trunc.check()?;
    let report = config.validate();
    if !report.is_ok() {
        return Err(SolverError::InvalidConfig(report));
    }
    let rotated = RotatedGeometry::new(config).to_config(config.matrix_conductivity);
    let base_sys = assemble_system(config, trunc.order, constants, ProblemTag::Base)?;
    let rot_sys = assemble_system(&rotated, trunc.order, constants, ProblemTag::Rotated)?;
    Ok((
        solve_coefficients(&base_sys, SolveMode::Direct)?,
        solve_coefficients(&rot_sys, SolveMode::Direct)?,
    ))
}

/// Sup over `samples` points of each inclusion boundary of the defect in the
/// conjugation condition
///
/// ```text
/// ψ(t) = ψ_k(t) + ρ_k (r_k / (t - a_k))² conj(ψ_k(t)) - s
/// ```
///
/// where `outer` evaluates the matrix potential and `inner(k, t)` the
/// potential of inclusion `k`, both for the geometry the coefficient set
/// was solved on. Returns one value per inclusion.
pub fn boundary_residuals<F, G>(
    config: &CellConfig,
    tag: ProblemTag,
    samples: usize,
    outer: F,
    inner: G,
) -> Result<Vec<f64>, EllipticError>
where
    F: Fn(Complex64) -> Result<Complex64, EllipticError>,
    G: Fn(usize, Complex64) -> Result<Complex64, EllipticError>,
{
    let s = tag.rhs_sign();
    config
        .inclusions
        .iter()
        .enumerate()
        .map(|(k, inc)| {
            let rho = config.contrast(k);
            let mut sup: f64 = 0.0;
            for i in 0..samples {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
                let e = Complex64::from_polar(1.0, theta);
                let t = inc.center + e * inc.radius;
                let psi_k = inner(k, t)?;
                // (r / (t - a))² = conj(e)²
                let defect = outer(t)? - psi_k - e.conj() * e.conj() * psi_k.conj() * rho + s;
                sup = sup.max(defect.norm());
            }
            Ok(sup)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn single(radius: f64, conductivity: f64) -> CellConfig {
        CellConfig::new(1.0, vec![Inclusion::new(c(0.0, 0.0), radius, conductivity)])
    }

    fn symmetric(radius: f64, conductivity: f64) -> CellConfig {
        let inclusions = [c(-0.25, 0.25), c(0.25, 0.25), c(0.25, -0.25), c(-0.25, -0.25)]
            .into_iter()
            .map(|a| Inclusion::new(a, radius, conductivity))
            .collect();
        CellConfig::new(1.0, inclusions)
    }

    #[test]
    fn homogeneous_system_is_identity() {
        let cfg = symmetric(0.1, 1.0);
        let constants = LatticeConstants::for_truncation(3);
        for tag in [ProblemTag::Base, ProblemTag::Rotated] {
            let sys = assemble_system(&cfg, 3, &constants, tag).unwrap();
            assert_eq!(sys.real_matrix(), DMatrix::identity(32, 32));
            let coeffs = solve_coefficients(&sys, SolveMode::Direct).unwrap();
            assert_eq!(coeffs, CoefficientSet::trivial(tag, 4, 3));
        }
    }

    #[test]
    fn single_inclusion_scalar_system() {
        let rho = 99.0 / 101.0;
        let r = 0.2;
        let cfg = single(r, 100.0);
        let constants = LatticeConstants::for_truncation(0);
        let sys = assemble_system(&cfg, 0, &constants, ProblemTag::Base).unwrap();
        assert!((sys.coupling[(0, 0)] - c(rho * r * r * PI, 0.0)).norm() < 1e-14);
        let coeffs = solve_coefficients(&sys, SolveMode::Direct).unwrap();
        let expected = 1.0 / (1.0 - rho * PI * r * r);
        assert!((coeffs.get(0, 0) - c(expected, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn direct_and_successive_approximation_agree() {
        let cfg = symmetric(0.145, 100.0);
        let constants = LatticeConstants::for_truncation(4);
        let sys = assemble_system(&cfg, 4, &constants, ProblemTag::Base).unwrap();
        let direct = solve_coefficients(&sys, SolveMode::Direct).unwrap();
        let iter = solve_coefficients(&sys, SolveMode::successive()).unwrap();
        assert!(direct.max_abs_difference(&iter) < 1e-10);
    }

    #[test]
    fn rotated_geometry_preserves_moduli() {
        let cfg = symmetric(0.1, 3.0);
        let rot = RotatedGeometry::new(&cfg);
        for (a, b) in cfg.inclusions.iter().zip(&rot.centers) {
            assert!((a.center.norm() - b.norm()).abs() < 1e-15);
            assert!((c(0.0, -1.0) * a.center - b).norm() < 1e-15);
        }
    }

    #[test]
    fn reduce_to_cell_maps_into_half_open_cell() {
        let (z, w) = reduce_to_cell(c(0.5, -0.5));
        assert_eq!(w, (1, 0));
        assert_eq!(z, c(-0.5, -0.5));
        let (z, w) = reduce_to_cell(c(2.3, 1.7));
        assert!((z - c(0.3, -0.3)).norm() < 1e-14);
        assert_eq!(w, (2, 2));
    }

    #[test]
    fn coincident_centers_are_rejected() {
        let cfg = CellConfig::new(
            1.0,
            vec![
                Inclusion::new(c(0.1, 0.1), 0.05, 2.0),
                Inclusion::new(c(0.1, 0.1), 0.05, 3.0),
            ],
        );
        let constants = LatticeConstants::for_truncation(1);
        assert_eq!(
            assemble_system(&cfg, 1, &constants, ProblemTag::Base).unwrap_err(),
            SolverError::CoincidentCenters(0, 1)
        );
    }

    #[test]
    fn invalid_truncation_is_rejected() {
        let cfg = single(0.1, 2.0);
        let constants = LatticeConstants::for_truncation(1);
        let trunc = Truncation {
            order: 1,
            quadrature_points: 4,
            boundary_samples: 64,
        };
        assert!(matches!(
            solve_auxiliary_pair(&cfg, &trunc, &constants),
            Err(SolverError::Truncation(_))
        ));
    }

    #[test]
    fn symmetric_config_has_real_coefficients() {
        // symmetric under z -> conj(z)
        let cfg = symmetric(0.17, 20.0);
        let constants = LatticeConstants::for_truncation(5);
        let (base, _) = solve_auxiliary_pair(&cfg, &Truncation::with_order(5), &constants).unwrap();
        // mirror pairs: a1 <-> a4, a2 <-> a3 with ψ_j(mirror) = conj(ψ_j)
        for (k, m) in [(0, 3), (1, 2)] {
            for j in 0..=5 {
                assert!((base.get(k, j) - base.get(m, j).conj()).norm() < 1e-10);
            }
        }
        let single = {
            let cfg = single(0.3, 20.0);
            solve_auxiliary_pair(&cfg, &Truncation::with_order(5), &constants).unwrap().0
        };
        for j in 0..=5 {
            assert!(single.get(0, j).im.abs() < 1e-10);
        }
    }
}
