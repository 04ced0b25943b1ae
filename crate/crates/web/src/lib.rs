//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The plain functions (`field_grid`, `effective`, `convergence`) take a JSON
//! cell description and are usable natively; the `wasm_*` wrappers expose
//! them to JavaScript.

use dpheat::fields::{AuxiliarySolution, Loading, Side};
use dpheat::geometry::{CellConfig, Inclusion, Region, BOUNDARY_TOL};
use dpheat::homogenize::{compare_solution, EffectiveTensor};
use dpheat::solver::{ProblemTag, Truncation};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest truncation order the demo accepts.
pub const MAX_ORDER: usize = 30;
/// Largest grid side the demo accepts.
pub const MAX_GRID: usize = 400;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoCell {
    pub matrix_conductivity: f64,
    #[serde(default)]
    pub inclusions: Vec<Inclusion>,
    #[serde(default = "default_intensity")]
    pub intensity: f64,
    #[serde(default)]
    pub angle: f64,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_intensity() -> f64 {
    -1.0
}

fn default_order() -> usize {
    4
}

impl DemoCell {
    pub fn parse(json: &str) -> Result<Self, String> {
        let cell: DemoCell = serde_json::from_str(json).map_err(|e| e.to_string())?;
        if cell.order > MAX_ORDER {
            return Err(format!("order {} exceeds {MAX_ORDER}", cell.order));
        }
        if !cell.intensity.is_finite() || cell.intensity == 0.0 || !cell.angle.is_finite() {
            return Err("loading must be finite with non-zero intensity".into());
        }
        let report = cell.config().validate();
        if !report.is_ok() {
            return Err(report.to_string());
        }
        Ok(cell)
    }

    pub fn config(&self) -> CellConfig {
        CellConfig::new(self.matrix_conductivity, self.inclusions.clone())
    }

    fn solve(&self, order: usize) -> Result<AuxiliarySolution, String> {
        AuxiliarySolution::solve(&self.config(), &Truncation::with_order(order)).map_err(|e| e.to_string())
    }
}

/// Flux and temperature sampled at `((i+½)/nx − ½, (j+½)/ny − ½)`, row-major in `j`.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct FieldGrid {
    nx: usize,
    ny: usize,
    qx: Vec<f64>,
    qy: Vec<f64>,
    t: Vec<f64>,
    region: Vec<i32>,
}

#[wasm_bindgen]
impl FieldGrid {
    #[wasm_bindgen(getter)]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[wasm_bindgen(getter)]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[wasm_bindgen(getter)]
    pub fn qx(&self) -> Vec<f64> {
        self.qx.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn qy(&self) -> Vec<f64> {
        self.qy.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    /// 0 for the matrix, `k` for inclusion `k` (1-based).
    #[wasm_bindgen(getter)]
    pub fn region(&self) -> Vec<i32> {
        self.region.clone()
    }
}

pub fn field_grid(cell_json: &str, nx: usize, ny: usize) -> Result<FieldGrid, String> {
    if !(2..=MAX_GRID).contains(&nx) || !(2..=MAX_GRID).contains(&ny) {
        return Err(format!("grid sides must lie in 2..={MAX_GRID}"));
    }
    let cell = DemoCell::parse(cell_json)?;
    let aux = cell.solve(cell.order)?;
    let full = aux
        .with_loading(Loading::new(cell.intensity, cell.angle))
        .map_err(|e| e.to_string())?;
    let config = cell.config();
    let n = nx * ny;
    let mut grid = FieldGrid {
        nx,
        ny,
        qx: Vec::with_capacity(n),
        qy: Vec::with_capacity(n),
        t: Vec::with_capacity(n),
        region: Vec::with_capacity(n),
    };
    for j in 0..ny {
        let y = (j as f64 + 0.5) / ny as f64 - 0.5;
        for i in 0..nx {
            let z = Complex64::new((i as f64 + 0.5) / nx as f64 - 0.5, y);
            let (side, label) = match config.locate(z, BOUNDARY_TOL).region {
                Region::Matrix => (Side::Matrix, 0),
                Region::Inclusion(k) | Region::Boundary(k) => (Side::Inclusion, k as i32 + 1),
            };
            let (qx, qy) = full.flux(z, Some(side)).map_err(|e| e.to_string())?;
            grid.qx.push(qx);
            grid.qy.push(qy);
            grid.t.push(full.temperature(z, Some(side)).map_err(|e| e.to_string())?);
            grid.region.push(label);
        }
    }
    Ok(grid)
}

#[derive(Debug, Clone, Serialize)]
pub struct EffectiveSummary {
    pub tensor: EffectiveTensor,
    pub nu: f64,
    pub maxwell: f64,
    pub delta_lambda: f64,
    pub residual_sup: f64,
    pub order: usize,
}

fn summarize(aux: &AuxiliarySolution, intensity: f64, order: usize) -> Result<EffectiveSummary, String> {
    let rec = compare_solution(aux, intensity).map_err(|e| e.to_string())?;
    let mut residual_sup: f64 = 0.0;
    for tag in [ProblemTag::Base, ProblemTag::Rotated] {
        residual_sup = residual_sup.max(aux.boundary_residual(tag).map_err(|e| e.to_string())?);
    }
    Ok(EffectiveSummary {
        tensor: rec.tensor,
        nu: rec.nu,
        maxwell: rec.lambda_maxwell,
        delta_lambda: rec.delta_lambda,
        residual_sup,
        order,
    })
}

pub fn effective(cell_json: &str) -> Result<EffectiveSummary, String> {
    let cell = DemoCell::parse(cell_json)?;
    summarize(&cell.solve(cell.order)?, cell.intensity, cell.order)
}

/// Effective tensor and boundary residual for every order `0..=max_order`.
pub fn convergence(cell_json: &str, max_order: usize) -> Result<Vec<EffectiveSummary>, String> {
    if max_order > MAX_ORDER {
        return Err(format!("order {max_order} exceeds {MAX_ORDER}"));
    }
    let cell = DemoCell::parse(cell_json)?;
    (0..=max_order)
        .map(|m| summarize(&cell.solve(m)?, cell.intensity, m))
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("summary serializes")
}

#[wasm_bindgen(js_name = fieldGrid)]
pub fn wasm_field_grid(cell_json: &str, nx: usize, ny: usize) -> Result<FieldGrid, JsError> {
    field_grid(cell_json, nx, ny).map_err(|e| JsError::new(&e))
}

/// JSON `{tensor, nu, maxwell, delta_lambda, residual_sup, order}`.
#[wasm_bindgen(js_name = effective)]
pub fn wasm_effective(cell_json: &str) -> Result<String, JsError> {
    effective(cell_json).map(|s| to_json(&s)).map_err(|e| JsError::new(&e))
}

/// JSON array of `effective` summaries for orders `0..=max_order`.
#[wasm_bindgen(js_name = convergence)]
pub fn wasm_convergence(cell_json: &str, max_order: usize) -> Result<String, JsError> {
    convergence(cell_json, max_order)
        .map(|s| to_json(&s))
        .map_err(|e| JsError::new(&e))
}
