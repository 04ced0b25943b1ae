//! Run configuration: the JSON document read by every subcommand.

use dpheat::fields::Loading;
use dpheat::geometry::{CellConfig, Inclusion};
use dpheat::solver::Truncation;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub matrix_conductivity: f64,
    #[serde(default)]
    pub inclusions: Vec<Inclusion>,
    #[serde(default = "default_loading")]
    pub loading: Loading,
    #[serde(default)]
    pub truncation: TruncationSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_quadrature")]
    pub quadrature_points: usize,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self {
            order: default_order(),
            quadrature_points: default_quadrature(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
}

fn default_loading() -> Loading {
    Loading::new(-1.0, 0.0)
}

fn default_order() -> usize {
    Truncation::default().order
}

fn default_quadrature() -> usize {
    Truncation::default().quadrature_points
}

impl RunConfig {
    pub fn cell(&self) -> CellConfig {
        CellConfig::new(self.matrix_conductivity, self.inclusions.clone())
    }

    pub fn truncation(&self) -> Truncation {
        Truncation {
            order: self.truncation.order,
            quadrature_points: self.truncation.quadrature_points,
            ..Truncation::default()
        }
    }

    /// Checks everything except the geometry, which `CellConfig::validate` covers.
    pub fn check(&self) -> Result<(), CliError> {
        let Loading { intensity, angle } = self.loading;
        if !intensity.is_finite() || intensity == 0.0 {
            return Err(CliError::Invalid(format!(
                "loading intensity must be finite and non-zero, got {intensity}"
            )));
        }
        if !angle.is_finite() {
            return Err(CliError::Invalid(format!("loading angle must be finite, got {angle}")));
        }
        if let Some(g) = &self.grid {
            if g.nx < 2 || g.ny < 2 {
                return Err(CliError::Invalid(format!(
                    "grid needs nx, ny >= 2, got {} x {}",
                    g.nx, g.ny
                )));
            }
        }
        self.truncation()
            .check()
            .map_err(|e| CliError::Invalid(e.to_string()))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| CliError::Parse {
        pointer: json_pointer(err.path()),
        message: err.inner().to_string(),
    })
}

pub fn render(config: &RunConfig) -> String {
    let mut text = serde_json::to_string_pretty(config).expect("config serializes");
    text.push('\n');
    text
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for segment in path.iter() {
        out.push('/');
        match segment {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_uses_defaults() {
        let cfg = parse_config(r#"{"matrix_conductivity": 1.0, "inclusions": []}"#).unwrap();
        assert_eq!(cfg.truncation, TruncationSpec { order: 4, quadrature_points: 64 });
        assert_eq!(cfg.loading, Loading::new(-1.0, 0.0));
        assert_eq!(cfg.grid, None);
    }

    #[test]
    fn error_carries_pointer() {
        let text = r#"{"matrix_conductivity": 1.0,
            "inclusions": [{"center": [0.0, 0.0], "radius": 0.1, "conductivity": 2.0},
                           {"center": [0.3, 0.0], "radius": "big", "conductivity": 2.0}]}"#;
        match parse_config(text) {
            Err(CliError::Parse { pointer, .. }) => assert_eq!(pointer, "/inclusions/1/radius"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_rejected() {
        let text = r#"{"matrix_conductivity": 1.0, "truncation": {"order": 2, "points": 3}}"#;
        assert!(matches!(parse_config(text), Err(CliError::Parse { .. })));
    }

    #[test]
    fn small_grid_is_invalid() {
        let mut cfg = parse_config(r#"{"matrix_conductivity": 1.0}"#).unwrap();
        cfg.grid = Some(Grid { nx: 1, ny: 4 });
        assert!(matches!(cfg.check(), Err(CliError::Invalid(_))));
    }
}
