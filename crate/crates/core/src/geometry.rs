//! Unit cell description: matrix conductivity and circular inclusions, with
//! validation and periodic point location.
//!
//! Inclusion indices are 0-based in the API. Human-readable messages number
//! inclusions from 1.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Disks closer than this are treated as touching.
pub const GAP_TOL: f64 = 1e-12;

/// Default half-width of the band around an interface reported as boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub center: Complex64,
    pub radius: f64,
    pub conductivity: f64,
}

impl Inclusion {
    pub fn new(center: Complex64, radius: f64, conductivity: f64) -> Self {
        Self {
            center,
            radius,
            conductivity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub matrix_conductivity: f64,
    pub inclusions: Vec<Inclusion>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MatrixConductivity { value: f64 },
    Conductivity { index: usize, value: f64 },
    Radius { index: usize, radius: f64 },
    RadiusTooLarge { index: usize, radius: f64 },
    CenterOutsideCell { index: usize, center: [f64; 2] },
    Overlap { first: usize, second: usize, gap: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MatrixConductivity { value } => {
                write!(f, "matrix conductivity must be positive and finite, got {value}")
            }
            Violation::Conductivity { index, value } => write!(
                f,
                "inclusion {}: conductivity must be positive and finite, got {value}",
                index + 1
            ),
            Violation::Radius { index, radius } => write!(
                f,
                "inclusion {}: radius must be positive and finite, got {radius}",
                index + 1
            ),
            Violation::RadiusTooLarge { index, radius } => {
                write!(f, "inclusion {}: radius {radius} is not below 1/2", index + 1)
            }
            Violation::CenterOutsideCell { index, center } => write!(
                f,
                "inclusion {}: center ({}, {}) is outside the open cell (-1/2, 1/2)^2",
                index + 1,
                center[0],
                center[1]
            ),
            Violation::Overlap { first, second, gap } => write!(
                f,
                "inclusions {} and {} overlap or touch (gap {gap})",
                first + 1,
                second + 1
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum Region {
    Matrix,
    Inclusion(usize),
    Boundary(usize),
}

/// Result of [`CellConfig::locate`].
///
/// `reduced_point = original - shift`. For matrix points the reduced point
/// lies in the closed central cell; for inclusion and boundary points it is
/// the representative nearest the inclusion center, which may sit just
/// outside the cell when the disk crosses an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointLocation {
    pub reduced_point: Complex64,
    pub region: Region,
    pub shift: (i64, i64),
}

impl CellConfig {
    pub fn new(matrix_conductivity: f64, inclusions: Vec<Inclusion>) -> Self {
        Self {
            matrix_conductivity,
            inclusions,
        }
    }

    pub fn homogeneous(matrix_conductivity: f64) -> Self {
        Self::new(matrix_conductivity, Vec::new())
    }

    /// Bergman contrast `ρ_k = (λ_k - λ_m) / (λ_k + λ_m)`.
    pub fn contrast(&self, k: usize) -> f64 {
        let lk = self.inclusions[k].conductivity;
        let lm = self.matrix_conductivity;
        (lk - lm) / (lk + lm)
    }

    pub fn contrasts(&self) -> Vec<f64> {
        (0..self.inclusions.len()).map(|k| self.contrast(k)).collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.contrasts().iter().all(|&r| r == 0.0)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let lm = self.matrix_conductivity;
        if !(lm.is_finite() && lm > 0.0) {
            violations.push(Violation::MatrixConductivity { value: lm });
        }
        for (index, inc) in self.inclusions.iter().enumerate() {
            let lk = inc.conductivity;
            if !(lk.is_finite() && lk > 0.0) {
                violations.push(Violation::Conductivity { index, value: lk });
            }
            let r = inc.radius;
            if !(r.is_finite() && r > 0.0) {
                violations.push(Violation::Radius { index, radius: r });
            } else if r >= 0.5 {
                violations.push(Violation::RadiusTooLarge { index, radius: r });
            }
            let c = inc.center;
            let inside = |x: f64| x.is_finite() && x > -0.5 && x < 0.5;
            if !(inside(c.re) && inside(c.im)) {
                violations.push(Violation::CenterOutsideCell {
                    index,
                    center: [c.re, c.im],
                });
            }
        }
        for first in 0..self.inclusions.len() {
            for second in first + 1..self.inclusions.len() {
                let gap = self.pair_gap(first, second);
                if gap.is_nan() || gap <= GAP_TOL {
                    violations.push(Violation::Overlap { first, second, gap });
                }
            }
        }
        ValidationReport { violations }
    }

    /// Smallest distance between the boundaries of disks `k` and `m` over
    /// the 3x3 block of periodic images.
    pub fn pair_gap(&self, k: usize, m: usize) -> f64 {
        let a = &self.inclusions[k];
        let b = &self.inclusions[m];
        min_image_distance(a.center - b.center) - a.radius - b.radius
    }

    /// Minimum gap over all pairs, including each disk and its own images.
    pub fn min_gap(&self) -> Option<f64> {
        let n = self.inclusions.len();
        let mut best: Option<f64> = None;
        for k in 0..n {
            let own = 1.0 - 2.0 * self.inclusions[k].radius;
            best = Some(best.map_or(own, |b| b.min(own)));
            for m in k + 1..n {
                let g = self.pair_gap(k, m);
                best = Some(best.map_or(g, |b| b.min(g)));
            }
        }
        best
    }

    pub fn volume_fraction(&self) -> f64 {
        self.inclusions
            .iter()
            .map(|inc| PI * inc.radius * inc.radius)
            .sum()
    }

    /// Reduces `z` into the central cell and classifies it.
    ///
    /// A point within `tol` of an interface is reported as boundary.
    pub fn locate(&self, z: Complex64, tol: f64) -> PointLocation {
        let m1 = z.re.round();
        let m2 = z.im.round();
        let z0 = z - Complex64::new(m1, m2);
        for (k, inc) in self.inclusions.iter().enumerate() {
            let (d, w) = nearest_image(z0 - inc.center);
            let dist = d.norm();
            if dist <= inc.radius + tol {
                let region = if (dist - inc.radius).abs() <= tol {
                    Region::Boundary(k)
                } else {
                    Region::Inclusion(k)
                };
                return PointLocation {
                    reduced_point: inc.center + d,
                    region,
                    shift: (m1 as i64 + w.0, m2 as i64 + w.1),
                };
            }
        }
        PointLocation {
            reduced_point: z0,
            region: Region::Matrix,
            shift: (m1 as i64, m2 as i64),
        }
    }
}

/// Smallest `|d - w|` over the 3x3 block of lattice shifts `w`.
pub(crate) fn min_image_distance(d: Complex64) -> f64 {
    nearest_image(d).0.norm()
}

/// Returns `(d - w, w)` for the shift `w` in the 3x3 block nearest to `d`,
/// after first reducing `d` by rounding.
pub(crate) fn nearest_image(d: Complex64) -> (Complex64, (i64, i64)) {
    let r1 = d.re.round();
    let r2 = d.im.round();
    let base = d - Complex64::new(r1, r2);
    let mut best = (base, (r1 as i64, r2 as i64));
    for s1 in -1..=1 {
        for s2 in -1..=1 {
            let cand = base - Complex64::new(s1 as f64, s2 as f64);
            if cand.norm() < best.0.norm() {
                best = (cand, (r1 as i64 + s1, r2 as i64 + s2));
            }
        }
    }
    best
}
