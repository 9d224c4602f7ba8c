//! Per-point functionals `ξ(x; X)` and their rescaled forms `ξ_λ`.
//!
//! Every functional is computed for all points at once from one shared
//! structure (one k-NN graph, one Delaunay triangulation, one component
//! decomposition). The value at a point always includes that point in the
//! structure.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, GeometricGraph, GeometryError, NeighborIndex};
use crate::point_process::{dim_root, rescale_about, MarkedConfiguration};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FunctionalError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("points {0} and {1} share the arrival mark {2}")]
    DuplicateMarks(usize, usize, f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point {0} is not a member of the configuration")]
    NotAMember(usize),
}

/// Color threshold `q: R^d → [0,1]`; values are clamped into `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ColorThreshold {
    Constant { value: f64 },
    /// `q(x) = clamp(intercept + Σ_j coefficients[j]·x_j)`.
    Linear { intercept: f64, coefficients: Vec<f64> },
}

impl ColorThreshold {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let v = match self {
            Self::Constant { value } => *value,
            Self::Linear {
                intercept,
                coefficients,
            } => intercept + coefficients.iter().zip(x).map(|(c, v)| c * v).sum::<f64>(),
        };
        v.clamp(0.0, 1.0)
    }

    /// Red iff `U_x ≤ q(x)`.
    pub fn is_red(&self, x: &[f64], mark: f64) -> bool {
        mark <= self.eval(x)
    }
}

/// One of the supported functionals together with its parameters. Length
/// parameters are in the units of the configuration the functional is
/// applied to (the scaled process `λ^{1/d}P_λ` for `ξ_λ`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Functional {
    /// Half the total length of k-NN graph edges at `x`.
    Knn { k: usize },
    /// 1 iff the k-th nearest neighbor distance is `< s`.
    KnnDistanceIndicator { k: usize, s: f64 },
    /// 1 iff `x` and its nearest neighbor have different colors.
    TwoColorMismatch { q: ColorThreshold },
    /// Half the finite edge length of the Voronoi cell (d = 2).
    VoronoiHalfLength,
    /// Half the degree in the sphere of influence graph.
    SigHalfDegree,
    /// 1 iff the sphere of influence degree equals `delta`.
    SigDegreeIndicator { delta: usize },
    /// 1 iff the ball of radius `r` at `x` is packed when balls arrive in
    /// mark order.
    RsaPacking { r: f64 },
    /// Independence number of the component of `G(X, b)` containing `x`
    /// divided by its size.
    IndependenceRatio { b: f64, cap: usize },
}

impl Functional {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Knn { .. } => "knn",
            Self::KnnDistanceIndicator { .. } => "knn-distance-indicator",
            Self::TwoColorMismatch { .. } => "two-color-mismatch",
            Self::VoronoiHalfLength => "voronoi-half-length",
            Self::SigHalfDegree => "sig-half-degree",
            Self::SigDegreeIndicator { .. } => "sig-degree-indicator",
            Self::RsaPacking { .. } => "rsa-packing",
            Self::IndependenceRatio { .. } => "independence-ratio",
        }
    }

    pub fn validate(&self) -> Result<(), FunctionalError> {
        let bad = |msg: String| Err(FunctionalError::InvalidParameter(msg));
        match self {
            Self::Knn { k } | Self::KnnDistanceIndicator { k, .. } if *k == 0 => bad("k must be ≥ 1".into()),
            Self::KnnDistanceIndicator { s, .. } if !(s.is_finite() && *s > 0.0) => bad(format!("s = {s} must be > 0")),
            Self::RsaPacking { r } if !(r.is_finite() && *r > 0.0) => bad(format!("r = {r} must be > 0")),
            Self::IndependenceRatio { b, .. } if !(b.is_finite() && *b > 0.0) => bad(format!("b = {b} must be > 0")),
            Self::IndependenceRatio { cap, .. } if *cap == 0 || *cap > geometry::MAX_COMPONENT_CAP => {
                bad(format!("cap = {cap} must be in 1..={}", geometry::MAX_COMPONENT_CAP))
            }
            Self::TwoColorMismatch {
                q: ColorThreshold::Constant { value },
            } if !(0.0..=1.0).contains(value) => bad(format!("constant q = {value} outside [0,1]")),
            _ => Ok(()),
        }
    }

    /// True for every kind whose value depends only on relative positions.
    pub fn is_translation_invariant(&self) -> bool {
        match self {
            Self::TwoColorMismatch { q } => matches!(q, ColorThreshold::Constant { .. }),
            _ => true,
        }
    }

    /// Values lie in `[0, 1]`.
    pub fn is_bounded_by_one(&self) -> bool {
        matches!(
            self,
            Self::KnnDistanceIndicator { .. }
                | Self::TwoColorMismatch { .. }
                | Self::SigDegreeIndicator { .. }
                | Self::RsaPacking { .. }
                | Self::IndependenceRatio { .. }
        )
    }

    pub fn min_points(&self) -> usize {
        match self {
            Self::Knn { k } | Self::KnnDistanceIndicator { k, .. } => k + 1,
            Self::TwoColorMismatch { .. } | Self::VoronoiHalfLength | Self::SigHalfDegree | Self::SigDegreeIndicator { .. } => 2,
            Self::RsaPacking { .. } | Self::IndependenceRatio { .. } => 0,
        }
    }
}

/// Per-point values aligned with configuration order, plus their sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiValue {
    pub per_point: Vec<f64>,
    pub total: f64,
}

impl XiValue {
    fn new(per_point: Vec<f64>) -> Self {
        let total = per_point.iter().sum();
        Self { per_point, total }
    }
}

fn require(config: &MarkedConfiguration, needed: usize) -> Result<(), FunctionalError> {
    if config.len() < needed {
        return Err(FunctionalError::TooFewPoints {
            needed,
            got: config.len(),
        });
    }
    Ok(())
}

/// `ξ(x; X)` for every `x ∈ X`.
pub fn evaluate(functional: &Functional, config: &MarkedConfiguration) -> Result<XiValue, FunctionalError> {
    functional.validate()?;
    match functional {
        Functional::Knn { k } => knn_xi(config, *k),
        Functional::KnnDistanceIndicator { k, s } => knn_distance_indicator(config, *s, *k),
        Functional::TwoColorMismatch { q } => two_color_mismatch(config, q),
        Functional::VoronoiHalfLength => voronoi_half_length_xi(config),
        Functional::SigHalfDegree => sig_xi(config, SigMode::HalfDegree),
        Functional::SigDegreeIndicator { delta } => sig_xi(config, SigMode::DegreeIndicator(*delta)),
        Functional::RsaPacking { r } => rsa_packing_xi(config, *r),
        Functional::IndependenceRatio { b, cap } => independence_ratio_xi(config, *b, *cap),
    }
}

pub fn knn_xi(config: &MarkedConfiguration, k: usize) -> Result<XiValue, FunctionalError> {
    if k == 0 {
        return Err(FunctionalError::InvalidParameter("k must be ≥ 1".into()));
    }
    require(config, k + 1)?;
    let index = NeighborIndex::new(config.coords(), config.dim());
    let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(config.len() * k);
    for i in 0..config.len() {
        for nb in index.k_nearest(index.point(i), k, Some(i)) {
            edges.push((i.min(nb.index), i.max(nb.index), nb.dist2));
        }
    }
    edges.sort_unstable_by_key(|&(a, b, _)| (a, b));
    edges.dedup_by_key(|&mut (a, b, _)| (a, b));
    let mut values = vec![0.0; config.len()];
    for (a, b, d2) in edges {
        let half = 0.5 * d2.sqrt();
        values[a] += half;
        values[b] += half;
    }
    Ok(XiValue::new(values))
}

pub fn knn_distance_indicator(config: &MarkedConfiguration, s: f64, k: usize) -> Result<XiValue, FunctionalError> {
    if k == 0 {
        return Err(FunctionalError::InvalidParameter("k must be ≥ 1".into()));
    }
    require(config, k + 1)?;
    let index = NeighborIndex::new(config.coords(), config.dim());
    let values = (0..config.len())
        .map(|i| {
            let kth = index.k_nearest(index.point(i), k, Some(i))[k - 1];
            if kth.dist2 < s * s {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(XiValue::new(values))
}

pub fn two_color_mismatch(config: &MarkedConfiguration, q: &ColorThreshold) -> Result<XiValue, FunctionalError> {
    let colors = colors(config, q);
    two_color_with_colors(config, &colors)
}

/// Red/green assignment `U_x ≤ q(x)` at the configuration's own positions.
pub fn colors(config: &MarkedConfiguration, q: &ColorThreshold) -> Vec<bool> {
    config.iter().map(|(x, u)| q.is_red(x, u)).collect()
}

/// Mismatch indicator for precomputed colors (`true` = red).
pub fn two_color_with_colors(config: &MarkedConfiguration, red: &[bool]) -> Result<XiValue, FunctionalError> {
    require(config, 2)?;
    let index = NeighborIndex::new(config.coords(), config.dim());
    let values = (0..config.len())
        .map(|i| {
            let nn = index.nearest(index.point(i), Some(i)).expect("n ≥ 2").index;
            if red[i] != red[nn] {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(XiValue::new(values))
}

pub fn voronoi_half_length_xi(config: &MarkedConfiguration) -> Result<XiValue, FunctionalError> {
    if config.dim() != 2 {
        return Err(GeometryError::Dimension {
            expected: 2,
            got: config.dim(),
        }
        .into());
    }
    require(config, 2)?;
    let points: Vec<[f64; 2]> = config.iter().map(|(p, _)| [p[0], p[1]]).collect();
    let cells = geometry::voronoi_cells(&points)?;
    Ok(XiValue::new(cells.iter().map(|c| 0.5 * c.finite_length()).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigMode {
    HalfDegree,
    DegreeIndicator(usize),
}

/// Sphere of influence graph: `{x, y}` is an edge iff `|x − y| ≤ r_x + r_y`
/// where `r_x` is the nearest-neighbor distance of `x`.
pub fn sphere_of_influence_graph(config: &MarkedConfiguration) -> Result<GeometricGraph, FunctionalError> {
    require(config, 2)?;
    let index = NeighborIndex::new(config.coords(), config.dim());
    let radii: Vec<f64> = (0..config.len())
        .map(|i| index.nearest(index.point(i), Some(i)).expect("n ≥ 2").dist2.sqrt())
        .collect();
    // r_x, r_y ≤ |x − y|, so an edge needs |x − y| ≤ 2 max(r_x, r_y): every
    // edge is found from its endpoint with the larger radius.
    let mut edges = Vec::new();
    for i in 0..config.len() {
        for j in index.within_radius(index.point(i), 2.0 * radii[i], true) {
            if j == i {
                continue;
            }
            let reach = radii[i] + radii[j];
            if geometry::dist2(index.point(i), index.point(j)) <= reach * reach {
                edges.push((i.min(j), i.max(j)));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(GeometricGraph::from_edges(config.len(), &edges))
}

pub fn sig_xi(config: &MarkedConfiguration, mode: SigMode) -> Result<XiValue, FunctionalError> {
    let graph = sphere_of_influence_graph(config)?;
    let values = (0..graph.len())
        .map(|v| match mode {
            SigMode::HalfDegree => 0.5 * graph.degree(v) as f64,
            SigMode::DegreeIndicator(delta) => {
                if graph.degree(v) == delta {
                    1.0
                } else {
                    0.0
                }
            }
        })
        .collect();
    Ok(XiValue::new(values))
}

/// Arrival order by mark; errors on a repeated mark.
pub fn arrival_order(config: &MarkedConfiguration) -> Result<Vec<usize>, FunctionalError> {
    let mut order: Vec<usize> = (0..config.len()).collect();
    order.sort_by(|&a, &b| config.mark(a).total_cmp(&config.mark(b)).then(a.cmp(&b)));
    for w in order.windows(2) {
        if config.mark(w[0]) == config.mark(w[1]) {
            return Err(FunctionalError::DuplicateMarks(w[0].min(w[1]), w[0].max(w[1]), config.mark(w[0])));
        }
    }
    Ok(order)
}

/// Random sequential packing with open balls of radius `r`: a ball is
/// rejected iff an already packed center lies at distance `< 2r`.
pub fn rsa_packing_xi(config: &MarkedConfiguration, r: f64) -> Result<XiValue, FunctionalError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(FunctionalError::InvalidParameter(format!("r = {r} must be > 0")));
    }
    let order = arrival_order(config)?;
    let dim = config.dim();
    let reach = 2.0 * r;
    let cell_of = |x: &[f64]| -> Vec<i64> { x.iter().map(|v| (v / reach).floor() as i64).collect() };
    let mut packed: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut values = vec![0.0; config.len()];
    let offsets = neighbor_offsets(dim);
    for i in order {
        let x = config.position(i);
        let home = cell_of(x);
        let blocked = offsets.iter().any(|off| {
            let key: Vec<i64> = home.iter().zip(off).map(|(h, o)| h + o).collect();
            packed.get(&key).is_some_and(|members| {
                members
                    .iter()
                    .any(|&j| geometry::dist2(x, config.position(j)) < reach * reach)
            })
        });
        if !blocked {
            values[i] = 1.0;
            packed.entry(home).or_default().push(i);
        }
    }
    Ok(XiValue::new(values))
}

fn neighbor_offsets(dim: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-1..=1).map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o);
                    p
                })
            })
            .collect();
    }
    out
}

/// `β(component of x in G(X, b)) / |component|`.
pub fn independence_ratio_xi(config: &MarkedConfiguration, b: f64, cap: usize) -> Result<XiValue, FunctionalError> {
    if !(b.is_finite() && b > 0.0) {
        return Err(FunctionalError::InvalidParameter(format!("b = {b} must be > 0")));
    }
    let graph = GeometricGraph::build(config.coords(), config.dim().max(1), b);
    let mut values = vec![0.0; config.len()];
    for comp in geometry::components(&graph) {
        let beta = geometry::independence_number(&graph, &comp, cap)?;
        let ratio = beta as f64 / comp.len() as f64;
        for v in comp {
            values[v] = ratio;
        }
    }
    Ok(XiValue::new(values))
}

/// Independence ratio at one member; only its own component is solved, so
/// large components elsewhere do not hit the cap.
pub fn independence_ratio_at(config: &MarkedConfiguration, b: f64, cap: usize, i: usize) -> Result<f64, FunctionalError> {
    if !(b.is_finite() && b > 0.0) {
        return Err(FunctionalError::InvalidParameter(format!("b = {b} must be > 0")));
    }
    if i >= config.len() {
        return Err(FunctionalError::NotAMember(i));
    }
    let graph = GeometricGraph::build(config.coords(), config.dim().max(1), b);
    let comp = geometry::components(&graph)
        .into_iter()
        .find(|c| c.contains(&i))
        .expect("every vertex lies in a component");
    let beta = geometry::independence_number(&graph, &comp, cap)?;
    Ok(beta as f64 / comp.len() as f64)
}

/// Radius of a `d`-ball of unit volume; the default packing radius in the
/// scaled process.
pub fn unit_volume_radius(dim: usize) -> f64 {
    let d = dim as f64;
    (libm::tgamma(d / 2.0 + 1.0) / std::f64::consts::PI.powf(d / 2.0)).powf(1.0 / d)
}

/// `ξ_λ` for every point: `ξ(x; x + λ^{1/d}(X − x))`.
///
/// Colors of the two-color functional are fixed by `q` at the unscaled
/// positions; the nearest neighbor is invariant under dilation, so only the
/// translation-invariant kinds are actually evaluated on the scaled set.
pub fn rescaled_values(functional: &Functional, lambda: f64, config: &MarkedConfiguration) -> Result<XiValue, FunctionalError> {
    functional.validate()?;
    match functional {
        Functional::TwoColorMismatch { q } => two_color_mismatch(config, q),
        _ => {
            let factor = dim_root(lambda, config.dim());
            evaluate(functional, &config.scale(factor))
        }
    }
}

/// `ξ_λ` at the member `x_index`, by dilating about that point.
pub fn evaluate_rescaled(
    functional: &Functional,
    lambda: f64,
    config: &MarkedConfiguration,
    x_index: usize,
) -> Result<f64, FunctionalError> {
    if x_index >= config.len() {
        return Err(FunctionalError::NotAMember(x_index));
    }
    functional.validate()?;
    let factor = dim_root(lambda, config.dim());
    let dilated = rescale_about(config.position(x_index), factor, config);
    let values = match functional {
        Functional::IndependenceRatio { b, cap } => return independence_ratio_at(&dilated, *b, *cap, x_index),
        Functional::TwoColorMismatch { q } => two_color_with_colors(&dilated, &colors(config, q))?,
        _ => evaluate(functional, &dilated)?,
    };
    Ok(values.per_point[x_index])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line(xs: &[f64]) -> MarkedConfiguration {
        MarkedConfiguration::from_positions(1, &xs.iter().map(|x| vec![*x]).collect::<Vec<_>>()).unwrap()
    }

    fn marked(dim: usize, pts: &[(&[f64], f64)]) -> MarkedConfiguration {
        MarkedConfiguration::from_points(
            dim,
            pts.iter().map(|(p, m)| crate::point_process::MarkedPoint::new(p.to_vec(), *m)),
        )
        .unwrap()
    }

    #[test]
    fn knn_single_edge() {
        let c = MarkedConfiguration::from_positions(2, &[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let xi = knn_xi(&c, 1).unwrap();
        assert_eq!(xi.per_point, vec![2.5, 2.5]);
        assert_eq!(xi.total, 5.0);
    }

    #[test]
    fn knn_on_a_line() {
        let xi = knn_xi(&line(&[0.0, 1.0, 3.0]), 1).unwrap();
        assert_eq!(xi.total, 3.0);
        assert_eq!(xi.per_point[1], 1.5);
        assert!(matches!(knn_xi(&line(&[0.0, 1.0]), 2), Err(FunctionalError::TooFewPoints { .. })));
    }

    #[test]
    fn distance_indicator() {
        let c = line(&[0.0, 0.5]);
        assert_eq!(knn_distance_indicator(&c, 1.0, 1).unwrap().per_point, vec![1.0, 1.0]);
        assert_eq!(knn_distance_indicator(&c, 0.3, 1).unwrap().per_point, vec![0.0, 0.0]);
        // strict inequality
        assert_eq!(knn_distance_indicator(&c, 0.5, 1).unwrap().total, 0.0);
    }

    #[test]
    fn two_color_examples() {
        let c = marked(1, &[(&[0.0], 0.2), (&[1.0], 0.9), (&[5.0], 0.4)]);
        assert_eq!(two_color_mismatch(&c, &ColorThreshold::constant(0.0)).unwrap().total, 0.0);
        let pair = marked(1, &[(&[0.0], 0.2), (&[1.0], 0.9)]);
        assert_eq!(two_color_mismatch(&pair, &ColorThreshold::constant(0.5)).unwrap().per_point, vec![1.0, 1.0]);
    }

    #[test]
    fn sig_examples() {
        let two = line(&[0.0, 1.0]);
        let xi = sig_xi(&two, SigMode::HalfDegree).unwrap();
        assert_eq!(xi.per_point, vec![0.5, 0.5]);
        assert_eq!(xi.total, 1.0);
        let tri = MarkedConfiguration::from_positions(2, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let xi = sig_xi(&tri, SigMode::HalfDegree).unwrap();
        assert_eq!(xi.per_point, vec![1.0, 1.0, 1.0]);
        assert_eq!(xi.total, 3.0);
        assert_eq!(sig_xi(&tri, SigMode::DegreeIndicator(2)).unwrap().total, 3.0);
        // Collinear unit spacing: 0–2 touch at the boundary and are joined.
        let g = sphere_of_influence_graph(&line(&[0.0, 1.0, 2.0])).unwrap();
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn rsa_examples() {
        let c = marked(1, &[(&[0.0], 0.1), (&[1.0], 0.5)]);
        assert_eq!(rsa_packing_xi(&c, 0.6).unwrap().per_point, vec![1.0, 0.0]);
        let far = marked(1, &[(&[0.0], 0.3), (&[10.0], 0.2), (&[20.0], 0.1)]);
        assert_eq!(rsa_packing_xi(&far, 0.6).unwrap().total, 3.0);
        let order = marked(1, &[(&[0.0], 0.9), (&[1.0], 0.1), (&[2.0], 0.5)]);
        assert_eq!(rsa_packing_xi(&order, 0.6).unwrap().per_point, vec![0.0, 1.0, 0.0]);
        // Contact at exactly 2r is allowed.
        let touch = marked(1, &[(&[0.0], 0.1), (&[1.0], 0.5)]);
        assert_eq!(rsa_packing_xi(&touch, 0.5).unwrap().total, 2.0);
    }

    #[test]
    fn rsa_duplicate_marks() {
        let c = marked(1, &[(&[0.0], 0.3), (&[1.0], 0.7), (&[2.0], 0.3)]);
        assert_eq!(rsa_packing_xi(&c, 0.1), Err(FunctionalError::DuplicateMarks(0, 2, 0.3)));
    }

    #[test]
    fn independence_ratio_examples() {
        let pair = line(&[0.0, 1.0, 10.0]);
        let xi = independence_ratio_xi(&pair, 1.0, 40).unwrap();
        assert_eq!(xi.per_point, vec![0.5, 0.5, 1.0]);
        let path = line(&[0.0, 1.0, 2.0]);
        let xi = independence_ratio_xi(&path, 1.0, 40).unwrap();
        for v in &xi.per_point {
            assert_relative_eq!(*v, 2.0 / 3.0);
        }
        assert_relative_eq!(xi.total, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn independence_ratio_at_ignores_far_components() {
        let mut xs = vec![-10.0, -9.0];
        xs.extend((0..50).map(|i| i as f64 * 0.01));
        let c = line(&xs);
        assert_eq!(independence_ratio_at(&c, 1.0, 40, 0).unwrap(), 0.5);
        assert!(independence_ratio_at(&c, 1.0, 40, 5).is_err());
    }

    #[test]
    fn independence_ratio_propagates_cap() {
        let dense = line(&(0..50).map(|i| i as f64 * 0.01).collect::<Vec<_>>());
        assert_eq!(
            independence_ratio_xi(&dense, 1.0, 40),
            Err(FunctionalError::Geometry(GeometryError::ComponentTooLarge { size: 50, cap: 40 }))
        );
    }

    #[test]
    fn voronoi_examples() {
        let two = MarkedConfiguration::from_positions(2, &[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(voronoi_half_length_xi(&two).unwrap().total, 0.0);
        let five = MarkedConfiguration::from_positions(
            2,
            &[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0], vec![2.0, 2.0], vec![1.0, 1.0]],
        )
        .unwrap();
        let xi = voronoi_half_length_xi(&five).unwrap();
        assert_relative_eq!(xi.per_point[4], 2.0 * 2f64.sqrt(), max_relative = 1e-12);
        assert!(matches!(voronoi_half_length_xi(&line(&[0.0, 1.0])), Err(FunctionalError::Geometry(_))));
    }

    #[test]
    fn unit_volume_radii() {
        assert_relative_eq!(unit_volume_radius(1), 0.5, max_relative = 1e-12);
        assert_relative_eq!(unit_volume_radius(2), 1.0 / std::f64::consts::PI.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(unit_volume_radius(3), (3.0 / (4.0 * std::f64::consts::PI)).cbrt(), max_relative = 1e-12);
    }

    #[test]
    fn rescaling_identity_and_homogeneity() {
        let c = crate::point_process::sample_poisson(40.0, &crate::point_process::Density::uniform(crate::point_process::Domain::unit_cube(2)), 5).unwrap();
        let f = Functional::Knn { k: 2 };
        let base = evaluate(&f, &c).unwrap();
        for i in [0, 3, 10] {
            assert_relative_eq!(evaluate_rescaled(&f, 1.0, &c, i).unwrap(), base.per_point[i], max_relative = 1e-12);
            // λ = 2^d doubles every distance.
            assert_relative_eq!(evaluate_rescaled(&f, 4.0, &c, i).unwrap(), 2.0 * base.per_point[i], max_relative = 1e-12);
        }
        assert!(matches!(evaluate_rescaled(&f, 1.0, &c, c.len()), Err(FunctionalError::NotAMember(_))));
    }

    #[test]
    fn two_color_rescaling_is_identity() {
        let c = crate::point_process::sample_poisson(60.0, &crate::point_process::Density::uniform(crate::point_process::Domain::unit_cube(2)), 8).unwrap();
        let f = Functional::TwoColorMismatch {
            q: ColorThreshold::Linear {
                intercept: 0.0,
                coefficients: vec![1.0],
            },
        };
        let base = evaluate(&f, &c).unwrap();
        for i in 0..c.len() {
            assert_eq!(evaluate_rescaled(&f, 300.0, &c, i).unwrap(), base.per_point[i]);
        }
        assert_eq!(rescaled_values(&f, 300.0, &c).unwrap(), base);
    }

    #[test]
    fn parameter_validation() {
        assert!(Functional::Knn { k: 0 }.validate().is_err());
        assert!(Functional::RsaPacking { r: -1.0 }.validate().is_err());
        assert!(Functional::IndependenceRatio { b: 1.0, cap: 65 }.validate().is_err());
        assert!(Functional::TwoColorMismatch { q: ColorThreshold::constant(1.5) }.validate().is_err());
        assert!(Functional::VoronoiHalfLength.validate().is_ok());
    }
}
