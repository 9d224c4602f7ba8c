use std::collections::VecDeque;

use super::kdtree::NeighborIndex;

/// `G(X, r)`: edge `{i, j}` iff `|x_i − x_j| ≤ r`.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    radius: f64,
    adjacency: Vec<Vec<usize>>,
}

impl GeometricGraph {
    pub fn build(coords: &[f64], dim: usize, radius: f64) -> Self {
        let index = NeighborIndex::new(coords, dim);
        Self::build_with(&index, radius)
    }

    pub fn build_with(index: &NeighborIndex<'_>, radius: f64) -> Self {
        let adjacency = (0..index.len())
            .map(|i| {
                index
                    .within_radius(index.point(i), radius, true)
                    .into_iter()
                    .filter(|&j| j != i)
                    .collect()
            })
            .collect();
        Self { radius, adjacency }
    }

    /// Graph from explicit undirected edges on `n` vertices.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a != b && !adjacency[a].contains(&b) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        adjacency.iter_mut().for_each(|l| l.sort_unstable());
        Self {
            radius: f64::NAN,
            adjacency,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Each undirected edge once, as `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Connected components, each sorted, ordered by smallest member.
pub fn components(graph: &GeometricGraph) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &w in graph.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}
