pub mod elliptic;
pub mod geometry;
pub mod solver;
pub mod fields;
pub mod homogenize;
