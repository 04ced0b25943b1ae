#![allow(dead_code)]

use std::f64::consts::PI;

use dpheat::geometry::{CellConfig, Inclusion};
use num_complex::Complex64;

pub const SYMMETRIC_CENTERS: [(f64, f64); 4] = [(-0.25, 0.25), (0.25, 0.25), (0.25, -0.25), (-0.25, -0.25)];
pub const ASYMMETRIC_CENTERS: [(f64, f64); 4] = [(-0.18, 0.2), (0.33, -0.34), (0.33, 0.35), (-0.18, -0.2)];

pub fn cell(centers: &[(f64, f64)], radius: f64, conductivity: f64) -> CellConfig {
    let inclusions = centers
        .iter()
        .map(|&(x, y)| Inclusion::new(Complex64::new(x, y), radius, conductivity))
        .collect();
    CellConfig::new(1.0, inclusions)
}

pub fn symmetric(radius: f64, conductivity: f64) -> CellConfig {
    cell(&SYMMETRIC_CENTERS, radius, conductivity)
}

pub fn asymmetric(radius: f64, conductivity: f64) -> CellConfig {
    cell(&ASYMMETRIC_CENTERS, radius, conductivity)
}

/// One centered inclusion with volume fraction `nu`.
pub fn centered(nu: f64, conductivity: f64) -> CellConfig {
    cell(&[(0.0, 0.0)], (nu / PI).sqrt(), conductivity)
}

/// Four symmetric inclusions with total volume fraction `nu`.
pub fn symmetric_with_fraction(nu: f64, conductivity: f64) -> CellConfig {
    symmetric((nu / (4.0 * PI)).sqrt(), conductivity)
}

/// Low-discrepancy points in the cell `[-1/2, 1/2)^2`.
pub fn cell_points(n: usize) -> impl Iterator<Item = Complex64> {
    const A1: f64 = 0.754_877_666_246_692_7;
    const A2: f64 = 0.569_840_290_998_053_3;
    (1..=n).map(|i| {
        let x = (0.5 + A1 * i as f64).fract() - 0.5;
        let y = (0.5 + A2 * i as f64).fract() - 0.5;
        Complex64::new(x, y)
    })
}

/// Every configuration used in the reference tables, with a label.
pub fn table_configs() -> Vec<(String, CellConfig)> {
    let mut out = Vec::new();
    for r in [0.005, 0.01, 0.03, 0.07, 0.1, 0.12, 0.145, 0.185, 0.2] {
        out.push((format!("symmetric R={r} λk=100"), symmetric(r, 100.0)));
        out.push((format!("symmetric R={r} λk=0.01"), symmetric(r, 0.01)));
    }
    for nu in [0.1, 0.2, 0.3, 0.4, 0.5, 0.55, 0.6] {
        out.push((format!("centered ν={nu} λk=50"), centered(nu, 50.0)));
        out.push((format!("four ν={nu} λk=50"), symmetric_with_fraction(nu, 50.0)));
    }
    for r in [0.05, 0.11, 0.135, 0.145] {
        out.push((format!("asymmetric R={r} λk=100"), asymmetric(r, 100.0)));
        out.push((format!("asymmetric R={r} λk=0.01"), asymmetric(r, 0.01)));
    }
    out
}
