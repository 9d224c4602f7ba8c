//! Geometric kernels shared by the functionals.
//!
//! All distance ties are broken by the smaller point index, and all
//! connection rules are closed (`|x − y| ≤ r`).

mod graph;
mod independence;
mod kdtree;
mod voronoi;

use thiserror::Error;

pub use graph::{components, GeometricGraph};
pub use independence::{
    independence_number, max_independent_set_size, DEFAULT_COMPONENT_CAP, MAX_COMPONENT_CAP,
};
pub use kdtree::{dist2, Neighbor, NeighborIndex};
pub use voronoi::{circumcenter, finite_edge_total, segment_length, voronoi_cells, VoronoiCell};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("component too large: {size} vertices exceeds the exactness cap {cap}")]
    ComponentTooLarge { size: usize, cap: usize },
    #[error("expected dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("triangulation failed: {0}")]
    Triangulation(String),
}

/// The `k` nearest neighbors of point `i` among `coords`, excluding `i`.
pub fn k_nearest(coords: &[f64], dim: usize, i: usize, k: usize) -> Result<Vec<usize>, GeometryError> {
    let n = coords.len() / dim;
    if k == 0 || k >= n {
        return Err(GeometryError::TooFewPoints { needed: k + 1, got: n });
    }
    let index = NeighborIndex::new(coords, dim);
    Ok(index
        .k_nearest(index.point(i), k, Some(i))
        .into_iter()
        .map(|nb| nb.index)
        .collect())
}
