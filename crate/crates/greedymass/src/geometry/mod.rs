//! Geometric primitives: p-norms, paths and animals with their lengths,
//! cones/diamonds/antidiamonds, orthogonal projections, minimum spanning
//! trees and cylinder-path decompositions.
//!
//! All predicates compare with an absolute tolerance of [`GEOM_TOL`];
//! coordinates are expected to be O(1)..O(1e3) so double precision leaves
//! plenty of headroom.

mod cylinder;
mod mst;
mod norm;
mod regions;
mod shapes;

pub use cylinder::{cylinder_decompose, is_cylinder_path};
pub use mst::{mst_length, mst_with_edges};
pub use norm::{NormSpec, PExp};
pub use regions::{
    in_antidiamond, in_cone, in_diamond, orth_project_onto_line, AntidiamondSpec, ConeSpec,
    DiamondSpec,
};
pub use shapes::{concat_animals, concat_paths, dfs_cover_path, Animal, GeomPath};

/// Absolute tolerance for geometric predicates.
pub const GEOM_TOL: f64 = 1e-9;

/// A point of R^d.
pub type Point = Vec<f64>;

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm of a coordinate slice.
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    norm2(&sub(a, b))
}

pub(crate) fn approx_eq_point(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
