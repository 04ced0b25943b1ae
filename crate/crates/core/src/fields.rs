//! Potentials, edge integrals, flux and temperature reconstructed from solved
//! coefficient sets.
//!
//! With `c_lm = ρ_m conj(ψ_lm) r_m^{2(l+1)}` the auxiliary potentials are
//!
//! ```text
//! matrix:       ψ(z)   = Σ_m Σ_l c_lm E_{l+2}(z - a_m)
//! inclusion k:  ψ_k(z) = Σ_{m≠k} Σ_l c_lm E_{l+2}(z - a_m) + Σ_l c_lk σ_{l+2}(z - a_k) + s
//! ```
//!
//! for the geometry each set was solved on. A loading of intensity `A` at
//! angle `θ` combines the base problem (`s = +1`) and the rotated problem
//! (`s = -1`, evaluated at `-iz`) through `B1`, `B2`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elliptic::{EllipticError, LatticeConstants};
use crate::geometry::{CellConfig, Region, BOUNDARY_TOL};
use crate::solver::{
    boundary_residuals, solve_auxiliary_pair, CoefficientSet, ProblemTag, RotatedGeometry,
    SolverError, Truncation,
};

/// Tolerance between quadrature and closed-form edge integrals.
pub const EDGE_INTEGRAL_TOL: f64 = 1e-8;

const MAX_PANELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    pub intensity: f64,
    pub angle: f64,
}

impl Loading {
    pub fn new(intensity: f64, angle: f64) -> Self {
        Self { intensity, angle }
    }
}

/// Which one-sided limit to take on an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Matrix,
    Inclusion,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("point {z} is in {found:?}, expected {expected}")]
    Domain {
        z: Complex64,
        found: Region,
        expected: &'static str,
    },
    #[error("point is on the boundary of inclusion {}; a side must be given", .0 + 1)]
    AmbiguousBoundary(usize),
    #[error("inclusion index {0} out of range")]
    InclusionIndex(usize),
    #[error("{tag:?} edge integral: quadrature {quadrature} and closed form {closed_form} disagree")]
    Consistency {
        tag: ProblemTag,
        quadrature: f64,
        closed_form: f64,
    },
}

/// One solved auxiliary problem together with the geometry it lives on.
#[derive(Debug, Clone)]
struct Problem {
    geometry: CellConfig,
    coefficients: CoefficientSet,
    /// `c_lm`, row-major by inclusion.
    weights: Vec<Complex64>,
}

impl Problem {
    fn new(geometry: CellConfig, coefficients: CoefficientSet) -> Self {
        let w = coefficients.order() + 1;
        let mut weights = Vec::with_capacity(geometry.inclusions.len() * w);
        for (m, inc) in geometry.inclusions.iter().enumerate() {
            let rho = geometry.contrast(m);
            let r2 = inc.radius * inc.radius;
            let mut r_pow = r2;
            for l in 0..w {
                weights.push(coefficients.get(m, l).conj() * (rho * r_pow));
                r_pow *= r2;
            }
        }
        Self {
            geometry,
            coefficients,
            weights,
        }
    }

    fn width(&self) -> usize {
        self.coefficients.order() + 1
    }

    fn sign(&self) -> f64 {
        self.coefficients.tag.rhs_sign()
    }

    fn weight(&self, m: usize, l: usize) -> Complex64 {
        self.weights[m * self.width() + l]
    }

    /// `Σ_l c_lm E_{l+2}(z - a_m)`
    fn term(&self, c: &LatticeConstants, m: usize, z: Complex64) -> Result<Complex64, EllipticError> {
        let w = self.width();
        let e = c.eisenstein_upto(w + 1, z - self.geometry.inclusions[m].center)?;
        Ok((0..w).map(|l| self.weight(m, l) * e[l + 2]).sum())
    }

    fn psi_matrix(&self, c: &LatticeConstants, z: Complex64) -> Result<Complex64, EllipticError> {
        let mut total = Complex64::new(0.0, 0.0);
        for m in 0..self.geometry.inclusions.len() {
            total += self.term(c, m, z)?;
        }
        Ok(total)
    }

    fn psi_inclusion(
        &self,
        c: &LatticeConstants,
        k: usize,
        z: Complex64,
    ) -> Result<Complex64, EllipticError> {
        let w = self.width();
        let mut total = Complex64::new(self.sign(), 0.0);
        for m in 0..self.geometry.inclusions.len() {
            if m != k {
                total += self.term(c, m, z)?;
            }
        }
        let s = c.sigma_upto(w + 1, z - self.geometry.inclusions[k].center)?;
        for l in 0..w {
            total += self.weight(k, l) * s[l + 2];
        }
        Ok(total)
    }

    /// Antiderivative of the matrix potential,
    /// `Σ_m [-c_0m E_1(z - a_m) - Σ_{l>=1} c_lm E_{l+1}(z - a_m) / (l+1)]`.
    fn phi_matrix(&self, c: &LatticeConstants, z: Complex64) -> Result<Complex64, EllipticError> {
        let w = self.width();
        let mut total = Complex64::new(0.0, 0.0);
        for (m, inc) in self.geometry.inclusions.iter().enumerate() {
            let e = c.eisenstein_upto(w, z - inc.center)?;
            for l in 0..w {
                total -= self.weight(m, l) * e[l + 1] / (l + 1) as f64;
            }
        }
        Ok(total)
    }

    /// Antiderivative of the inclusion potential without its constant.
    fn phi_inclusion(
        &self,
        c: &LatticeConstants,
        k: usize,
        z: Complex64,
    ) -> Result<Complex64, EllipticError> {
        let w = self.width();
        let ak = self.geometry.inclusions[k].center;
        let mut total = (z - ak) * self.sign();
        for (m, inc) in self.geometry.inclusions.iter().enumerate() {
            let g = if m == k {
                c.sigma_upto(w, z - ak)?
            } else {
                c.eisenstein_upto(w, z - inc.center)?
            };
            for l in 0..w {
                total -= self.weight(m, l) * g[l + 1] / (l + 1) as f64;
            }
        }
        Ok(total)
    }

    /// `Σ_m c_0m`, the coefficient of `-E_1` summed over inclusions.
    fn e1_weight(&self) -> Complex64 {
        (0..self.geometry.inclusions.len())
            .map(|m| self.weight(m, 0))
            .sum()
    }

    /// `Σ_m 2π Re(c_0m)`, the edge integral from `∫ E_2 dy = 2π`, `∫ E_{l+2} dy = 0`.
    fn edge_integral_closed_form(&self) -> f64 {
        2.0 * PI * self.e1_weight().re
    }

    fn locate(&self, z: Complex64) -> crate::geometry::PointLocation {
        self.geometry.locate(z, BOUNDARY_TOL)
    }
}

/// Solutions of both auxiliary problems and their edge integrals.
#[derive(Debug, Clone)]
pub struct AuxiliarySolution {
    pub config: CellConfig,
    pub truncation: Truncation,
    pub edge_integral_i: f64,
    pub edge_integral_i_perp: f64,
    constants: LatticeConstants,
    base: Problem,
    rotated: Problem,
}

impl AuxiliarySolution {
    pub fn solve(config: &CellConfig, truncation: &Truncation) -> Result<Self, FieldError> {
        let constants = LatticeConstants::for_truncation(truncation.order);
        let (base, rotated) = solve_auxiliary_pair(config, truncation, &constants)?;
        Self::from_parts(config, truncation, constants, base, rotated)
    }

    pub fn from_parts(
        config: &CellConfig,
        truncation: &Truncation,
        constants: LatticeConstants,
        base: CoefficientSet,
        rotated: CoefficientSet,
    ) -> Result<Self, FieldError> {
        let rot_geometry = RotatedGeometry::new(config).to_config(config.matrix_conductivity);
        let base = Problem::new(config.clone(), base);
        let rotated = Problem::new(rot_geometry, rotated);
        let (i, i_perp) =
            compute_edge_integrals(&constants, &base, &rotated, truncation.quadrature_points)?;
        Ok(Self {
            config: config.clone(),
            truncation: *truncation,
            edge_integral_i: i,
            edge_integral_i_perp: i_perp,
            constants,
            base,
            rotated,
        })
    }

    pub fn constants(&self) -> &LatticeConstants {
        &self.constants
    }

    fn problem(&self, tag: ProblemTag) -> &Problem {
        match tag {
            ProblemTag::Base => &self.base,
            ProblemTag::Rotated => &self.rotated,
        }
    }

    pub fn coefficients(&self, tag: ProblemTag) -> &CoefficientSet {
        &self.problem(tag).coefficients
    }

    /// The geometry a problem was solved on (the rotated problem uses `b_k = -i a_k`).
    pub fn geometry(&self, tag: ProblemTag) -> &CellConfig {
        &self.problem(tag).geometry
    }

    /// Matrix-side potential of one auxiliary problem, in that problem's plane.
    pub fn eval_psi_matrix(&self, tag: ProblemTag, z: Complex64) -> Result<Complex64, FieldError> {
        let p = self.problem(tag);
        let loc = p.locate(z);
        if let Region::Inclusion(_) = loc.region {
            return Err(FieldError::Domain {
                z,
                found: loc.region,
                expected: "the matrix; use eval_psi_inclusion",
            });
        }
        Ok(p.psi_matrix(&self.constants, loc.reduced_point)?)
    }

    /// Potential of inclusion `k` for one auxiliary problem, in that problem's plane.
    pub fn eval_psi_inclusion(
        &self,
        tag: ProblemTag,
        k: usize,
        z: Complex64,
    ) -> Result<Complex64, FieldError> {
        let p = self.problem(tag);
        if k >= p.geometry.inclusions.len() {
            return Err(FieldError::InclusionIndex(k));
        }
        let loc = p.locate(z);
        match loc.region {
            Region::Inclusion(j) | Region::Boundary(j) if j == k => {
                Ok(p.psi_inclusion(&self.constants, k, loc.reduced_point)?)
            }
            found => Err(FieldError::Domain {
                z,
                found,
                expected: "the given inclusion",
            }),
        }
    }

    /// Closed-form edge integral `Σ_m 2π ρ_m r_m² Re conj(ψ_0m)`.
    pub fn edge_integral_closed_form(&self, tag: ProblemTag) -> f64 {
        self.problem(tag).edge_integral_closed_form()
    }

    /// `∫ Im ψ(x + i/2) dx` over the top edge; zero for the exact potential.
    pub fn im_edge_integral(&self, tag: ProblemTag) -> Result<f64, FieldError> {
        let p = self.problem(tag);
        let rule = gauss_rule(self.truncation.quadrature_points);
        Ok(integrate(&rule, 4, |x| {
            Ok(p.psi_matrix(&self.constants, Complex64::new(x, 0.5))?.im)
        })?)
    }

    /// Sup-norm defect of the conjugation condition on each inclusion boundary.
    pub fn boundary_residuals(&self, tag: ProblemTag) -> Result<Vec<f64>, FieldError> {
        let p = self.problem(tag);
        let c = &self.constants;
        Ok(boundary_residuals(
            &p.geometry,
            tag,
            self.truncation.boundary_samples,
            |t| p.psi_matrix(c, t),
            |k, t| p.psi_inclusion(c, k, t),
        )?)
    }

    pub fn boundary_residual(&self, tag: ProblemTag) -> Result<f64, FieldError> {
        Ok(self
            .boundary_residuals(tag)?
            .into_iter()
            .fold(0.0, f64::max))
    }

    pub fn with_loading(&self, loading: Loading) -> Result<FullSolution<'_>, FieldError> {
        FullSolution::new(self, loading)
    }
}

fn gauss_rule(points: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(points.max(1)).unwrap())
}

/// Composite Gauss-Legendre over `[-1/2, 1/2]` with `panels` equal panels.
fn integrate<F>(rule: &GaussLegendre, panels: usize, mut f: F) -> Result<f64, EllipticError>
where
    F: FnMut(f64) -> Result<f64, EllipticError>,
{
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = -0.5 + (p as f64 + 0.5) * h;
        for &(x, w) in rule.as_node_weight_pairs() {
            total += w * f(mid + 0.5 * h * x)?;
        }
    }
    Ok(total * 0.5 * h)
}

/// Edge integrals `I = ∫ Re ψ(1/2 + iy) dy` for the base and rotated problems.
///
/// The quadrature is compared with the closed form; when a center lies close
/// to the edge the rule is repeated on more panels before giving up.
fn compute_edge_integrals(
    constants: &LatticeConstants,
    base: &Problem,
    rotated: &Problem,
    quadrature_points: usize,
) -> Result<(f64, f64), FieldError> {
    let rule = gauss_rule(quadrature_points);
    let one = |p: &Problem| -> Result<f64, FieldError> {
        let closed_form = p.edge_integral_closed_form();
        let mut panels = 1;
        loop {
            let quadrature = integrate(&rule, panels, |y| {
                Ok(p.psi_matrix(constants, Complex64::new(0.5, y))?.re)
            })?;
            if (quadrature - closed_form).abs() <= EDGE_INTEGRAL_TOL {
                return Ok(quadrature);
            }
            if panels >= MAX_PANELS {
                return Err(FieldError::Consistency {
                    tag: p.coefficients.tag,
                    quadrature,
                    closed_form,
                });
            }
            panels *= 2;
        }
    };
    Ok((one(base)?, one(rotated)?))
}

/// A loaded cell: both auxiliary problems combined for intensity `A` and angle `θ`.
#[derive(Debug, Clone)]
pub struct FullSolution<'a> {
    pub aux: &'a AuxiliarySolution,
    pub loading: Loading,
    pub b1: f64,
    pub b2: f64,
    /// Integration constants of the inclusion temperature potentials.
    inclusion_constants: Vec<Complex64>,
}

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

impl<'a> FullSolution<'a> {
    pub fn new(aux: &'a AuxiliarySolution, loading: Loading) -> Result<Self, FieldError> {
        let lm = aux.config.matrix_conductivity;
        let a = loading.intensity;
        let b1 = -a * loading.angle.cos() / (lm * (aux.edge_integral_i + 1.0));
        let b2 = -a * loading.angle.sin() / (lm * (aux.edge_integral_i_perp - 1.0));
        let mut full = Self {
            aux,
            loading,
            b1,
            b2,
            inclusion_constants: Vec::new(),
        };
        full.inclusion_constants = (0..aux.config.inclusions.len())
            .map(|k| full.inclusion_constant(k))
            .collect::<Result<_, _>>()?;
        Ok(full)
    }

    /// `B = B1 + i B2`.
    pub fn b(&self) -> Complex64 {
        Complex64::new(self.b1, self.b2)
    }

    fn c(&self) -> &LatticeConstants {
        &self.aux.constants
    }

    /// Combined matrix potential `ψ(z) = B1 ψ_base(z) - i B2 ψ_rot(-iz)`.
    fn psi_matrix(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        let mut v = self.aux.base.psi_matrix(self.c(), z)? * self.b1;
        if self.b2 != 0.0 {
            v += MINUS_I * self.aux.rotated.psi_matrix(self.c(), MINUS_I * z)? * self.b2;
        }
        Ok(v)
    }

    /// Combined potential of inclusion `k`; `z` must be near `a_k`.
    fn psi_inclusion(&self, k: usize, z: Complex64) -> Result<Complex64, EllipticError> {
        let mut v = self.aux.base.psi_inclusion(self.c(), k, z)? * self.b1;
        if self.b2 != 0.0 {
            let w = self.rotated_near(k, z);
            v += MINUS_I * self.aux.rotated.psi_inclusion(self.c(), k, w)? * self.b2;
        }
        Ok(v)
    }

    /// `-iz` shifted to lie near the rotated center `b_k`.
    fn rotated_near(&self, k: usize, z: Complex64) -> Complex64 {
        let w = MINUS_I * z;
        let target = self.aux.rotated.geometry.inclusions[k].center;
        let d = w - target;
        w - Complex64::new(d.re.round(), d.im.round())
    }

    /// `ψ_k(a_k) = B1 ψ_0k - i B2 ψ⊥_0k`.
    pub fn inclusion_center_value(&self, k: usize) -> Complex64 {
        self.aux.base.coefficients.get(k, 0) * self.b1
            + MINUS_I * self.aux.rotated.coefficients.get(k, 0) * self.b2
    }

    fn phi_matrix(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        let mut v = self.aux.base.phi_matrix(self.c(), z)? * self.b1;
        if self.b2 != 0.0 {
            v += self.aux.rotated.phi_matrix(self.c(), MINUS_I * z)? * self.b2;
        }
        Ok(v)
    }

    fn phi_inclusion_raw(&self, k: usize, z: Complex64) -> Result<Complex64, EllipticError> {
        let mut v = self.aux.base.phi_inclusion(self.c(), k, z)? * self.b1;
        if self.b2 != 0.0 {
            let w = self.rotated_near(k, z);
            v += self.aux.rotated.phi_inclusion(self.c(), k, w)? * self.b2;
        }
        Ok(v)
    }

    /// Constant `C_k` solving `C - ρ conj(C) = D` so that the contact
    /// condition `φ(t) = φ_k(t) - ρ conj(φ_k(t)) - Bt` holds at `t = a_k + r_k`.
    fn inclusion_constant(&self, k: usize) -> Result<Complex64, EllipticError> {
        let inc = &self.aux.config.inclusions[k];
        let rho = self.aux.config.contrast(k);
        let t = inc.center + inc.radius;
        let f = self.phi_inclusion_raw(k, t)?;
        let d = self.phi_matrix(t)? + self.b() * t - f + f.conj() * rho;
        Ok(Complex64::new(d.re / (1.0 - rho), d.im / (1.0 + rho)))
    }

    /// Change of the matrix temperature under the lattice shift `m1 + i m2`.
    pub fn cell_jump(&self, shift: (i64, i64)) -> f64 {
        let (m1, m2) = (shift.0 as f64, shift.1 as f64);
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        let jump = self.b() * Complex64::new(m1, m2)
            + two_pi_i * m2 * self.b1 * self.aux.base.e1_weight()
            - two_pi_i * m1 * self.b2 * self.aux.rotated.e1_weight();
        jump.re
    }

    fn region(&self, z: Complex64) -> crate::geometry::PointLocation {
        self.aux.config.locate(z, BOUNDARY_TOL)
    }

    /// Heat flux `(Qx, Qy)` at `z`. On an interface `side` selects the limit.
    pub fn flux(&self, z: Complex64, side: Option<Side>) -> Result<(f64, f64), FieldError> {
        let loc = self.region(z);
        let lm = self.aux.config.matrix_conductivity;
        let inside = match (loc.region, side) {
            (Region::Matrix, _) => None,
            (Region::Inclusion(k), _) => Some(k),
            (Region::Boundary(k), Some(Side::Inclusion)) => Some(k),
            (Region::Boundary(_), Some(Side::Matrix)) => None,
            (Region::Boundary(k), None) => return Err(FieldError::AmbiguousBoundary(k)),
        };
        match inside {
            None => {
                let v = self.psi_matrix(loc.reduced_point)? + self.b();
                Ok((lm * v.re, -lm * v.im))
            }
            Some(k) => {
                let lk = self.aux.config.inclusions[k].conductivity;
                let v = self.psi_inclusion(k, loc.reduced_point)?;
                let f = 2.0 * lk * lm / (lm + lk);
                Ok((f * v.re, -f * v.im))
            }
        }
    }

    /// Temperature at `z`, with the matrix potential constant set to zero.
    pub fn temperature(&self, z: Complex64, side: Option<Side>) -> Result<f64, FieldError> {
        let loc = self.region(z);
        let inside = match (loc.region, side) {
            (Region::Matrix, _) => None,
            (Region::Inclusion(k), _) => Some(k),
            (Region::Boundary(_), Some(Side::Matrix)) => None,
            (Region::Boundary(k), _) => Some(k),
        };
        let zr = loc.reduced_point;
        let local = match inside {
            None => (self.phi_matrix(zr)? + self.b() * zr).re,
            Some(k) => {
                let lm = self.aux.config.matrix_conductivity;
                let lk = self.aux.config.inclusions[k].conductivity;
                let v = self.phi_inclusion_raw(k, zr)? + self.inclusion_constants[k];
                2.0 * lm / (lm + lk) * v.re
            }
        };
        Ok(local + self.cell_jump(loc.shift))
    }
}
