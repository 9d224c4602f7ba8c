//! Planar Voronoi cells via Delaunay duality.
//!
//! A Voronoi edge is dual to a Delaunay edge; it is finite exactly when both
//! sides of the Delaunay edge are inner triangles, and then runs between the
//! two circumcenters. Circumcenters are computed once per triangle so a
//! shared edge has bit-identical endpoints in both of its cells.

use spade::handles::{FixedFaceHandle, InnerTag};
use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

use super::GeometryError;

#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiCell {
    pub generator: usize,
    /// Finite edges as `[start, end]` segments.
    pub finite_edges: Vec<[[f64; 2]; 2]>,
    /// Number of unbounded (ray or line) edges.
    pub unbounded_edges: usize,
}

impl VoronoiCell {
    pub fn is_bounded(&self) -> bool {
        self.unbounded_edges == 0
    }

    pub fn finite_length(&self) -> f64 {
        self.finite_edges.iter().map(|[a, b]| segment_length(a, b)).sum()
    }
}

pub fn segment_length(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

struct Site {
    pos: Point2<f64>,
    index: usize,
}

impl HasPosition for Site {
    type Scalar = f64;

    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

/// Circumcenter of a triangle, computed relative to its first vertex.
pub fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    [a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d]
}

/// Voronoi cells of `points`, one per generator in input order.
pub fn voronoi_cells(points: &[[f64; 2]]) -> Result<Vec<VoronoiCell>, GeometryError> {
    if points.len() < 2 {
        return Err(GeometryError::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let sites: Vec<Site> = points
        .iter()
        .enumerate()
        .map(|(index, p)| Site {
            pos: Point2::new(p[0], p[1]),
            index,
        })
        .collect();
    let tri = DelaunayTriangulation::<Site>::bulk_load(sites)
        .map_err(|e| GeometryError::Triangulation(format!("{e:?}")))?;
    if tri.num_vertices() != points.len() {
        return Err(GeometryError::Triangulation("coincident generators".into()));
    }

    let mut centers: Vec<Option<[f64; 2]>> = vec![None; tri.num_all_faces()];
    let mut center_of = |face: FixedFaceHandle<InnerTag>| -> [f64; 2] {
        *centers[face.index()].get_or_insert_with(|| {
            let mut v = tri.face(face).vertices().map(|h| (h.data().index, [h.position().x, h.position().y]));
            v.sort_by_key(|(i, _)| *i);
            circumcenter(v[0].1, v[1].1, v[2].1)
        })
    };

    let mut cells: Vec<VoronoiCell> = (0..points.len())
        .map(|generator| VoronoiCell {
            generator,
            finite_edges: Vec::new(),
            unbounded_edges: 0,
        })
        .collect();
    for edge in tri.undirected_edges() {
        let directed = edge.as_directed();
        let [a, b] = edge.vertices().map(|v| v.data().index);
        let left = directed.face().as_inner().map(|f| f.fix());
        let right = directed.rev().face().as_inner().map(|f| f.fix());
        match (left, right) {
            (Some(f), Some(g)) => {
                let (p, q) = (center_of(f), center_of(g));
                cells[a].finite_edges.push([p, q]);
                cells[b].finite_edges.push([p, q]);
            }
            _ => {
                cells[a].unbounded_edges += 1;
                cells[b].unbounded_edges += 1;
            }
        }
    }
    Ok(cells)
}

/// Total length of the finite edges of the diagram, each edge once.
pub fn finite_edge_total(cells: &[VoronoiCell]) -> f64 {
    0.5 * cells.iter().map(VoronoiCell::finite_length).sum::<f64>()
}
