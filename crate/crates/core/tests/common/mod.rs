//! Independent whole-structure oracles and instance generators shared by the
//! integration tests. Everything here is brute force on purpose.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stablab::point_process::{MarkedConfiguration, MarkedPoint};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn d2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `n` uniform points in `[0, side]^dim` with uniform marks.
pub fn random_config(rng: &mut impl Rng, dim: usize, n: usize, side: f64) -> MarkedConfiguration {
    let pts = (0..n).map(|_| {
        let pos: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * side).collect();
        MarkedPoint::new(pos, rng.random())
    });
    MarkedConfiguration::from_points(dim, pts).unwrap()
}

/// Other points sorted by `(distance², index)`.
fn ranked(c: &MarkedConfiguration, i: usize) -> Vec<(f64, usize)> {
    let mut v: Vec<(f64, usize)> = (0..c.len())
        .filter(|&j| j != i)
        .map(|j| (d2(c.position(i), c.position(j)), j))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    v
}

/// Total length of the undirected k-NN graph, from the full edge set.
pub fn knn_total_length(c: &MarkedConfiguration, k: usize) -> f64 {
    let mut edges = std::collections::BTreeSet::new();
    for i in 0..c.len() {
        for &(_, j) in ranked(c, i).iter().take(k) {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    edges.iter().map(|&(a, b)| d2(c.position(a), c.position(b)).sqrt()).sum()
}

/// Number of points whose k-th nearest neighbor is closer than `s`.
pub fn knn_indicator_count(c: &MarkedConfiguration, k: usize, s: f64) -> f64 {
    (0..c.len()).filter(|&i| ranked(c, i)[k - 1].0 < s * s).count() as f64
}

/// Points whose nearest neighbor has the other color.
pub fn mismatch_count(c: &MarkedConfiguration, red: impl Fn(&[f64], f64) -> bool) -> f64 {
    (0..c.len())
        .filter(|&i| {
            let j = ranked(c, i)[0].1;
            red(c.position(i), c.mark(i)) != red(c.position(j), c.mark(j))
        })
        .count() as f64
}

/// Sphere of influence graph degrees from an all-pairs census.
pub fn sig_degrees(c: &MarkedConfiguration) -> Vec<usize> {
    let r: Vec<f64> = (0..c.len()).map(|i| ranked(c, i)[0].0.sqrt()).collect();
    let mut deg = vec![0; c.len()];
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            if d2(c.position(i), c.position(j)).sqrt() <= r[i] + r[j] {
                deg[i] += 1;
                deg[j] += 1;
            }
        }
    }
    deg
}

/// Balls packed by sequential arrival in mark order, quadratic scan.
pub fn rsa_packed(c: &MarkedConfiguration, r: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| c.mark(a).total_cmp(&c.mark(b)));
    let mut packed: Vec<usize> = Vec::new();
    for i in order {
        if packed.iter().all(|&j| d2(c.position(i), c.position(j)) >= 4.0 * r * r) {
            packed.push(i);
        }
    }
    packed.sort_unstable();
    packed
}

/// Adjacency of `G(X, b)` (closed rule), all pairs.
pub fn threshold_graph(c: &MarkedConfiguration, b: f64) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); c.len()];
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            if d2(c.position(i), c.position(j)) <= b * b {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

/// Independence number by include/exclude recursion on a max-degree vertex;
/// isolated vertices are always taken.
pub fn independence_number(adj: &[Vec<usize>]) -> usize {
    fn go(adj: &[Vec<usize>], alive: &mut Vec<bool>) -> usize {
        let degree = |v: usize, alive: &[bool]| adj[v].iter().filter(|&&w| alive[w]).count();
        let mut taken = Vec::new();
        for v in 0..adj.len() {
            if alive[v] && degree(v, alive) == 0 {
                alive[v] = false;
                taken.push(v);
            }
        }
        let best = (0..adj.len()).filter(|&v| alive[v]).max_by_key(|&v| degree(v, alive));
        let result = match best {
            None => 0,
            Some(v) => {
                alive[v] = false;
                let without = go(adj, alive);
                let removed: Vec<usize> = adj[v].iter().copied().filter(|&w| alive[w]).collect();
                for &w in &removed {
                    alive[w] = false;
                }
                let with = 1 + go(adj, alive);
                for &w in &removed {
                    alive[w] = true;
                }
                alive[v] = true;
                without.max(with)
            }
        };
        for v in &taken {
            alive[*v] = true;
        }
        result + taken.len()
    }
    go(adj, &mut vec![true; adj.len()])
}

/// Components of an adjacency list, via union-find.
pub fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut parent: Vec<usize> = (0..adj.len()).collect();
    for (i, nbrs) in adj.iter().enumerate() {
        for &j in nbrs {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..adj.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// β of the graph as the sum of β over components.
pub fn independence_by_components(adj: &[Vec<usize>]) -> usize {
    components(adj)
        .iter()
        .map(|comp| {
            let local: std::collections::HashMap<usize, usize> = comp.iter().enumerate().map(|(k, &v)| (v, k)).collect();
            let sub: Vec<Vec<usize>> = comp.iter().map(|v| adj[*v].iter().map(|w| local[w]).collect()).collect();
            independence_number(&sub)
        })
        .sum()
}

fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    let (a2, b2, c2) = (a[0] * a[0] + a[1] * a[1], b[0] * b[0] + b[1] * b[1], c[0] * c[0] + c[1] * c[1]);
    [
        (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d,
        (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d,
    ]
}

/// Polygon vertex: position plus the generators whose bisectors meet there
/// (`None` for a bounding-box side).
#[derive(Clone, Copy)]
struct Vertex {
    p: [f64; 2],
    sides: [Option<usize>; 2],
}

/// Finite Voronoi edge length per cell, by clipping a huge box with the
/// bisector half-planes of all other generators, nearest first. Vertices
/// where two bisectors meet are recomputed as circumcenters; edges touching
/// the box are unbounded and dropped.
pub fn voronoi_finite_lengths(points: &[[f64; 2]]) -> Vec<f64> {
    const HALF: f64 = 1e7;
    let mut out = Vec::with_capacity(points.len());
    for (i, &g) in points.iter().enumerate() {
        // Edge k runs from poly[k] to poly[k+1] and lies on bisector edge_of[k].
        let mut poly: Vec<Vertex> = [[-HALF, -HALF], [HALF, -HALF], [HALF, HALF], [-HALF, HALF]]
            .iter()
            .map(|&p| Vertex { p, sides: [None, None] })
            .collect();
        let mut edge_of: Vec<Option<usize>> = vec![None; 4];
        let mut order: Vec<usize> = (0..points.len()).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| d2(&points[a], &g).total_cmp(&d2(&points[b], &g)));
        for j in order {
            let h = points[j];
            // keep z with (h − g)·z ≤ (|h|² − |g|²)/2
            let n = [h[0] - g[0], h[1] - g[1]];
            let c = 0.5 * ((h[0] * h[0] + h[1] * h[1]) - (g[0] * g[0] + g[1] * g[1]));
            let side = |p: [f64; 2]| n[0] * p[0] + n[1] * p[1] - c;
            // skip generators whose bisector misses the current polygon
            if poly.iter().all(|v| side(v.p) <= 0.0) {
                continue;
            }
            let m = poly.len();
            let mut next_poly = Vec::new();
            let mut next_edges = Vec::new();
            for k in 0..m {
                let (a, b) = (poly[k], poly[(k + 1) % m]);
                let (sa, sb) = (side(a.p), side(b.p));
                if sa <= 0.0 {
                    next_poly.push(a);
                    next_edges.push(edge_of[k]);
                }
                if (sa <= 0.0) != (sb <= 0.0) {
                    let t = sa / (sa - sb);
                    let p = [a.p[0] + t * (b.p[0] - a.p[0]), a.p[1] + t * (b.p[1] - a.p[1])];
                    next_poly.push(Vertex {
                        p,
                        sides: [edge_of[k], Some(j)],
                    });
                    // leaving: the new edge runs along bisector j
                    next_edges.push(if sa <= 0.0 { Some(j) } else { edge_of[k] });
                }
            }
            poly = next_poly;
            edge_of = next_edges;
        }
        let m = poly.len();
        let exact: Vec<Option<[f64; 2]>> = poly
            .iter()
            .map(|v| match v.sides {
                [Some(a), Some(b)] => Some(circumcenter(g, points[a], points[b])),
                _ => None,
            })
            .collect();
        let mut total = 0.0;
        for k in 0..m {
            if edge_of[k].is_none() {
                continue;
            }
            if let (Some(a), Some(b)) = (exact[k], exact[(k + 1) % m]) {
                total += (a[0] - b[0]).hypot(a[1] - b[1]);
            }
        }
        out.push(total);
    }
    out
}

/// Euclidean distance between grid cubes, in units of the side.
pub fn cube_distance(a: &[i64], b: &[i64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| ((x - y).abs() - 1).max(0) as f64)
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt()
}
