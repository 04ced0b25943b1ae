use dpheat_web::{convergence, effective, field_grid, MAX_ORDER};

const SYMMETRIC: &str = r#"{"matrix_conductivity": 1.0, "inclusions": [
  {"center": [-0.25, 0.25], "radius": 0.1, "conductivity": 100.0},
  {"center": [0.25, 0.25], "radius": 0.1, "conductivity": 100.0},
  {"center": [0.25, -0.25], "radius": 0.1, "conductivity": 100.0},
  {"center": [-0.25, -0.25], "radius": 0.1, "conductivity": 100.0}]}"#;

#[test]
fn homogeneous_grid() {
    let g = field_grid(r#"{"matrix_conductivity": 2.0}"#, 4, 3).unwrap();
    assert_eq!((g.nx(), g.ny()), (4, 3));
    assert_eq!(g.qx(), vec![1.0; 12]);
    assert!(g.qy().iter().all(|&v| v == 0.0));
    assert!(g.region().iter().all(|&r| r == 0));
    // first row is y = -1/3, x = -3/8, -1/8, 1/8, 3/8
    assert!((g.t()[0] + 0.375 / 2.0).abs() < 1e-15);
}

#[test]
fn grid_labels_inclusions() {
    let g = field_grid(SYMMETRIC, 8, 8).unwrap();
    let region = g.region();
    // (-0.4375, -0.4375) is matrix; (-0.3125, -0.3125) and (-0.1875, -0.1875)
    // lie in the lower-left disk, inclusion 4
    assert_eq!(region[0], 0);
    assert_eq!(region[8 + 1], 4);
    assert_eq!(region[2 * 8 + 2], 4);
    assert_eq!(region.iter().filter(|&&r| r > 0).count(), 16);
    assert!(g.t().iter().chain(&g.qx()).chain(&g.qy()).all(|v| v.is_finite()));
}

#[test]
fn effective_matches_reference() {
    let s = effective(SYMMETRIC).unwrap();
    assert!((s.tensor.xx - 1.28098).abs() < 5e-5);
    assert!((s.maxwell - 1.28096).abs() < 5e-6);
    assert_eq!(s.order, 4);
}

#[test]
fn convergence_runs_every_order() {
    let rows = convergence(SYMMETRIC, 6).unwrap();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().enumerate().all(|(m, r)| r.order == m));
    assert!(rows[6].residual_sup < rows[0].residual_sup);
    assert!(convergence(SYMMETRIC, MAX_ORDER + 1).is_err());
}

#[test]
fn bad_input_is_reported() {
    assert!(effective("{").is_err());
    let overlap = r#"{"matrix_conductivity": 1.0, "inclusions": [
      {"center": [0.0, 0.0], "radius": 0.2, "conductivity": 5.0},
      {"center": [0.3, 0.0], "radius": 0.2, "conductivity": 5.0}]}"#;
    assert!(effective(overlap).unwrap_err().contains("overlap"));
    assert!(field_grid(SYMMETRIC, 1, 10).is_err());
}
