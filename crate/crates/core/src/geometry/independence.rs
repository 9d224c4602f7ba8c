//! Exact independence number for small graphs by branch and bound.

use super::graph::GeometricGraph;
use super::GeometryError;

pub const DEFAULT_COMPONENT_CAP: usize = 40;

/// Hard ceiling for the bitset representation.
pub const MAX_COMPONENT_CAP: usize = 64;

/// `β` of the subgraph induced by `vertices` (usually one component).
pub fn independence_number(graph: &GeometricGraph, vertices: &[usize], cap: usize) -> Result<usize, GeometryError> {
    let cap = cap.min(MAX_COMPONENT_CAP);
    if vertices.len() > cap {
        return Err(GeometryError::ComponentTooLarge {
            size: vertices.len(),
            cap,
        });
    }
    let mut local = vec![usize::MAX; graph.len()];
    for (k, &v) in vertices.iter().enumerate() {
        local[v] = k;
    }
    let adj: Vec<u64> = vertices
        .iter()
        .map(|&v| {
            graph
                .neighbors(v)
                .iter()
                .filter(|&&w| local[w] != usize::MAX)
                .fold(0u64, |m, &w| m | (1u64 << local[w]))
        })
        .collect();
    Ok(max_independent_set_size(&adj))
}

/// Independence number of a graph on at most 64 vertices given as adjacency
/// bitmasks.
pub fn max_independent_set_size(adj: &[u64]) -> usize {
    assert!(adj.len() <= 64);
    let all = if adj.len() == 64 { u64::MAX } else { (1u64 << adj.len()) - 1 };
    let mut best = greedy_lower_bound(adj, all);
    branch(adj, all, 0, &mut best);
    best as usize
}

fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(v)
        }
    })
}

/// Repeatedly take a minimum-degree vertex.
fn greedy_lower_bound(adj: &[u64], mut cand: u64) -> u32 {
    let mut size = 0;
    while cand != 0 {
        let v = bits(cand).min_by_key(|&v| (adj[v] & cand).count_ones()).unwrap();
        size += 1;
        cand &= !(adj[v] | (1u64 << v));
    }
    size
}

/// Greedy clique cover of `cand`; an independent set meets each clique at
/// most once.
fn clique_cover_bound(adj: &[u64], mut cand: u64) -> u32 {
    let mut cliques = 0;
    while cand != 0 {
        let u = cand.trailing_zeros() as usize;
        cand &= !(1u64 << u);
        let mut common = adj[u] & cand;
        while common != 0 {
            let w = common.trailing_zeros() as usize;
            cand &= !(1u64 << w);
            common &= adj[w] & !(1u64 << w);
        }
        cliques += 1;
    }
    cliques
}

fn branch(adj: &[u64], mut cand: u64, mut size: u32, best: &mut u32) {
    // Vertices of degree ≤ 1 belong to some maximum independent set.
    loop {
        let low = bits(cand).find(|&v| (adj[v] & cand).count_ones() <= 1);
        match low {
            Some(v) => {
                size += 1;
                cand &= !(adj[v] | (1u64 << v));
            }
            None => break,
        }
    }
    if cand == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + clique_cover_bound(adj, cand) <= *best {
        return;
    }
    let v = bits(cand)
        .max_by_key(|&v| ((adj[v] & cand).count_ones(), std::cmp::Reverse(v)))
        .unwrap();
    branch(adj, cand & !(adj[v] | (1u64 << v)), size + 1, best);
    branch(adj, cand & !(1u64 << v), size, best);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn beta(n: usize, edges: &[(usize, usize)]) -> usize {
        let g = GeometricGraph::from_edges(n, edges);
        independence_number(&g, &(0..n).collect::<Vec<_>>(), DEFAULT_COMPONENT_CAP).unwrap()
    }

    /// Subset enumeration.
    fn brute(n: usize, edges: &[(usize, usize)]) -> usize {
        (0u32..(1 << n))
            .filter(|s| edges.iter().all(|&(a, b)| s & (1 << a) == 0 || s & (1 << b) == 0))
            .map(|s| s.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn small_named_graphs() {
        assert_eq!(beta(3, &[(0, 1), (1, 2), (0, 2)]), 1);
        assert_eq!(beta(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]), 2);
        assert_eq!(beta(6, &[]), 6);
        assert_eq!(beta(0, &[]), 0);
    }

    #[test]
    fn cap_exceeded() {
        let g = GeometricGraph::from_edges(41, &[]);
        let all: Vec<usize> = (0..41).collect();
        assert!(matches!(
            independence_number(&g, &all, 40),
            Err(GeometryError::ComponentTooLarge { size: 41, cap: 40 })
        ));
    }

    #[test]
    fn matches_subset_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let n = rng.random_range(1..=16);
            let p: f64 = rng.random_range(0.05..0.7);
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .filter(|_| rng.random::<f64>() < p)
                .collect();
            assert_eq!(beta(n, &edges), brute(n, &edges));
        }
    }
}
