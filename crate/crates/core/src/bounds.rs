//! Numeric side of the normal-approximation argument: the Chen–Shao
//! dependency-graph bound, the cube dependency graph, choices of `ρ_λ`, and
//! the two rate expressions.
//!
//! Generic constants `C` are explicit inputs (default 1).

use serde::Serialize;
use thiserror::Error;

use crate::point_process::CubePartition;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("{name} = {value} out of range: {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: String,
    },
}

fn out_of_range(name: &'static str, value: f64, expected: impl Into<String>) -> BoundsError {
    BoundsError::OutOfRange {
        name,
        value,
        expected: expected.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChenShaoInput {
    /// Moment order, `2 < q ≤ 3`.
    pub q: f64,
    /// Self-inclusive degree: maximal vertex degree plus one.
    pub d: u64,
    /// Number of vertices `|V|`.
    pub v: u64,
    /// Bound on `‖W_i‖_q`.
    pub theta: f64,
}

/// `75 D^{5(q−1)} |V| θ^q`.
pub fn chen_shao_bound(input: &ChenShaoInput) -> Result<f64, BoundsError> {
    let ChenShaoInput { q, d, v, theta } = *input;
    if !(q > 2.0 && q <= 3.0) {
        return Err(out_of_range("q", q, "2 < q ≤ 3"));
    }
    if d < 1 {
        return Err(out_of_range("D", d as f64, "D ≥ 1"));
    }
    if v < 1 {
        return Err(out_of_range("V", v as f64, "V ≥ 1"));
    }
    if !(theta.is_finite() && theta > 0.0) {
        return Err(out_of_range("theta", theta, "θ > 0"));
    }
    Ok(75.0 * (d as f64).powf(5.0 * (q - 1.0)) * v as f64 * theta.powf(q))
}

/// Cubes joined when their set distance is at most `2 s_λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependencyGraph {
    pub side: f64,
    pub threshold: f64,
    pub adjacency: Vec<Vec<usize>>,
    pub max_degree: usize,
}

impl DependencyGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// `D` as used in the Chen–Shao bound (max degree + 1).
    pub fn degree_for_bound(&self) -> u64 {
        self.max_degree as u64 + 1
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Set distance between grid cubes whose indices differ by `offset`, in
/// units of the side length, squared: `Σ max(|δ_j| − 1, 0)²`.
pub fn cube_gap2(offset: &[i64]) -> i64 {
    offset.iter().map(|o| (o.abs() - 1).max(0).pow(2)).sum()
}

pub fn build_dependency_graph(partition: &CubePartition) -> DependencyGraph {
    let dim = partition.dim();
    // Offsets within set distance 2s: |δ_j| ≤ 3 per axis, gap² ≤ 4.
    let mut offsets: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..dim {
        offsets = offsets
            .into_iter()
            .flat_map(|p| {
                (-3..=3).map(move |o| {
                    let mut q = p.clone();
                    q.push(o);
                    q
                })
            })
            .collect();
    }
    offsets.retain(|o| o.iter().any(|&v| v != 0) && cube_gap2(o) <= 4);

    let adjacency: Vec<Vec<usize>> = partition
        .cubes()
        .iter()
        .map(|cube| {
            let mut adj: Vec<usize> = offsets
                .iter()
                .filter_map(|o| {
                    let key: Vec<i64> = cube.index.iter().zip(o).map(|(a, b)| a + b).collect();
                    partition.position_of(&key)
                })
                .collect();
            adj.sort_unstable();
            adj
        })
        .collect();
    let max_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
    DependencyGraph {
        side: partition.side(),
        threshold: 2.0 * partition.side(),
        adjacency,
        max_degree,
    }
}

/// `ρ_λ = α log λ` (exponential stabilization).
pub fn rho_exponential(lambda: f64, alpha: f64) -> Result<f64, BoundsError> {
    if !(lambda >= 2.0 && lambda.is_finite()) {
        return Err(out_of_range("lambda", lambda, "λ ≥ 2"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(out_of_range("alpha", alpha, "α > 0"));
    }
    Ok(alpha * lambda.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolynomialRho {
    /// `a = 25p / (pγ − 6d)`.
    pub a: f64,
    /// `ρ_λ = C λ^a`.
    pub rho: f64,
    /// `a (γ/6 − d/p)`, identically `25/6`.
    pub check: f64,
}

/// `ρ_λ = C λ^a` for polynomial stabilization of order `γ`.
pub fn rho_polynomial(lambda: f64, p: f64, gamma: f64, d: f64, c: f64) -> Result<PolynomialRho, BoundsError> {
    if !(p * gamma > 6.0 * d) {
        return Err(out_of_range("gamma", gamma, format!("pγ > 6d, i.e. γ > {}", 6.0 * d / p)));
    }
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(out_of_range("lambda", lambda, "λ ≥ 1"));
    }
    let a = 25.0 * p / (p * gamma - 6.0 * d);
    Ok(PolynomialRho {
        a,
        rho: c * lambda.powf(a),
        check: a * (gamma / 6.0 - d / p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateParameters {
    pub d: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub variance: f64,
}

/// `C (log λ)^{dq} λ (Var T_λ)^{−q/2}`.
pub fn theorem1_rhs(params: &RateParameters, c: f64) -> Result<f64, BoundsError> {
    let RateParameters {
        d, q, lambda, variance, ..
    } = *params;
    if !(lambda >= 2.0 && lambda.is_finite()) {
        return Err(out_of_range("lambda", lambda, "λ ≥ 2"));
    }
    if !(variance > 0.0) {
        return Err(out_of_range("variance", variance, "Var T_λ > 0"));
    }
    Ok(c * lambda.ln().powf(d * q) * lambda * variance.powf(-q / 2.0))
}

/// `(150pd + 6d − pγ) / (2(pγ − 6d))`, negative whenever `γ > d(150 + 6/p)`.
pub fn theorem2_exponent(p: f64, gamma: f64, d: f64) -> Result<f64, BoundsError> {
    let threshold = d * (150.0 + 6.0 / p);
    if !(gamma > threshold) {
        return Err(out_of_range("gamma", gamma, format!("γ > d(150 + 6/p) = {threshold}")));
    }
    Ok(theorem2_exponent_unchecked(p, gamma, d))
}

/// The same expression without the range check.
pub fn theorem2_exponent_unchecked(p: f64, gamma: f64, d: f64) -> f64 {
    (150.0 * p * d + 6.0 * d - p * gamma) / (2.0 * (p * gamma - 6.0 * d))
}

/// `C λ^{exponent}`.
pub fn theorem2_rhs(lambda: f64, p: f64, gamma: f64, d: f64, c: f64) -> Result<f64, BoundsError> {
    Ok(c * lambda.powf(theorem2_exponent(p, gamma, d)?))
}
