//! Radii of stabilization, Monte Carlo checks of the stabilization identity,
//! empirical tail probabilities `τ̂(t)`, decay classification and moment
//! estimates.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::functionals::{evaluate_rescaled, Functional, FunctionalError};
use crate::geometry::{self, NeighborIndex};
use crate::harness::{fit_line, LinearFit};
use crate::point_process::{dim_root, sample_poisson_with, Density, MarkedConfiguration, ProcessError};
use crate::rng;

#[derive(Debug, Error)]
pub enum StabilizationError {
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error("radius rule {rule} does not apply to functional {functional}")]
    IncompatibleRule { rule: String, functional: &'static str },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// How a radius of stabilization is computed. Lengths are in the scaled
/// process `λ^{1/d}P_λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum RadiusRule {
    /// Distance from `x` to its nearest neighbor.
    NearestNeighbor,
    /// Distance from `x` to the furthest member of its component in
    /// `G(·, b)`, plus `2b`.
    ComponentExtent { b: f64 },
    /// A fixed user-supplied radius; no correctness claim is attached.
    Probe { radius: f64 },
}

impl RadiusRule {
    pub fn name(&self) -> String {
        match self {
            Self::NearestNeighbor => "nn-distance".into(),
            Self::ComponentExtent { b } => format!("component-extent-plus-2b(b={b})"),
            Self::Probe { radius } => format!("probe({radius})"),
        }
    }

    /// Shipped (rule, functional) pairs.
    pub fn check_compatible(&self, functional: &Functional) -> Result<(), StabilizationError> {
        let ok = match (self, functional) {
            (Self::Probe { .. }, _) => true,
            (Self::NearestNeighbor, Functional::TwoColorMismatch { .. }) => true,
            (Self::NearestNeighbor, Functional::Knn { k: 1 } | Functional::KnnDistanceIndicator { k: 1, .. }) => true,
            (Self::ComponentExtent { b }, Functional::IndependenceRatio { b: fb, .. }) => b == fb,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(StabilizationError::IncompatibleRule {
                rule: self.name(),
                functional: functional.name(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusOutcome {
    /// `+∞` when the rule needs a neighbor and there is none.
    pub radius: f64,
    pub unbounded: bool,
}

impl RadiusOutcome {
    fn finite(radius: f64) -> Self {
        Self {
            radius,
            unbounded: false,
        }
    }

    fn infinite() -> Self {
        Self {
            radius: f64::INFINITY,
            unbounded: true,
        }
    }

    pub fn exceeds(&self, t: f64) -> bool {
        self.unbounded || self.radius > t
    }
}

/// `R(x, λ)` for the member `x_index` of `config` (unscaled coordinates).
pub fn radius_at(
    config: &MarkedConfiguration,
    lambda: f64,
    x_index: usize,
    rule: &RadiusRule,
) -> Result<RadiusOutcome, StabilizationError> {
    if x_index >= config.len() {
        return Err(FunctionalError::NotAMember(x_index).into());
    }
    let factor = dim_root(lambda, config.dim());
    match rule {
        RadiusRule::Probe { radius } => Ok(RadiusOutcome::finite(*radius)),
        RadiusRule::NearestNeighbor => {
            let x = config.position(x_index);
            let best = config
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != x_index)
                .map(|(_, (y, _))| geometry::dist2(x, y))
                .fold(f64::INFINITY, f64::min);
            Ok(if best.is_finite() {
                RadiusOutcome::finite(factor * best.sqrt())
            } else {
                RadiusOutcome::infinite()
            })
        }
        RadiusRule::ComponentExtent { b } => {
            let scaled = config.scale(factor);
            let index = NeighborIndex::new(scaled.coords(), scaled.dim());
            let x = index.point(x_index);
            let mut seen = vec![false; scaled.len()];
            seen[x_index] = true;
            let mut stack = vec![x_index];
            let mut furthest2: f64 = 0.0;
            while let Some(v) = stack.pop() {
                furthest2 = furthest2.max(geometry::dist2(x, index.point(v)));
                for w in index.within_radius(index.point(v), *b, true) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            Ok(RadiusOutcome::finite(furthest2.sqrt() + 2.0 * b))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilizationCheck {
    pub trials: usize,
    pub violations: usize,
    pub baseline: f64,
}

/// Perturbs `config` outside the closed ball `B_{λ^{-1/d}R}(x)` and counts
/// trials where `ξ_λ` at `x` changes by more than `1e-12`.
///
/// Each trial inserts an independent Poisson sample of intensity `λκ`
/// restricted to the complement of the ball and deletes each outside point
/// of `config` with probability 1/2.
#[allow(clippy::too_many_arguments)]
pub fn verify_stabilization(
    functional: &Functional,
    lambda: f64,
    density: &Density,
    config: &MarkedConfiguration,
    x_index: usize,
    radius: f64,
    trials: usize,
    seed: u64,
) -> Result<StabilizationCheck, StabilizationError> {
    if trials == 0 {
        return Err(StabilizationError::InvalidArgument("trials must be ≥ 1".into()));
    }
    if x_index >= config.len() {
        return Err(FunctionalError::NotAMember(x_index).into());
    }
    let baseline = evaluate_rescaled(functional, lambda, config, x_index)?;
    let x = config.position(x_index).to_vec();
    // compared in the scaled frame, computed as in `radius_at`, so that a
    // point at exactly the radius stays inside despite rounding
    let factor = dim_root(lambda, config.dim());
    let inside = |y: &[f64]| factor * geometry::dist2(&x, y).sqrt() <= radius;
    let outcomes: Vec<Result<bool, StabilizationError>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng::replicate_stream(seed, 0, trial as u32);
            let mut kept = Vec::with_capacity(config.len());
            let mut new_x = 0;
            for (i, (y, _)) in config.iter().enumerate() {
                if i == x_index {
                    new_x = kept.len();
                    kept.push(i);
                } else if inside(y) || rng.random::<bool>() {
                    kept.push(i);
                }
            }
            let mut perturbed = config.select(&kept);
            let extra = sample_poisson_with(lambda, density, &mut rng)?;
            let outside: Vec<usize> = (0..extra.len())
                .filter(|&j| !inside(extra.position(j)))
                .collect();
            perturbed.extend_from(&extra.select(&outside));
            match evaluate_rescaled(functional, lambda, &perturbed, new_x) {
                Ok(value) => Ok((value - baseline).abs() > 1e-12),
                // the value at x stopped being defined
                Err(FunctionalError::TooFewPoints { .. }) => Ok(true),
                Err(e) => Err(e.into()),
            }
        })
        .collect();
    let mut violations = 0;
    for o in outcomes {
        if o? {
            violations += 1;
        }
    }
    Ok(StabilizationCheck {
        trials,
        violations,
        baseline,
    })
}

/// `R(x, λ)` for a point `x` inserted into `config` with the given mark.
fn radius_inserted(
    config: &MarkedConfiguration,
    lambda: f64,
    x: &[f64],
    mark: f64,
    rule: &RadiusRule,
) -> Result<RadiusOutcome, StabilizationError> {
    match rule {
        RadiusRule::NearestNeighbor => {
            let best = config.iter().map(|(y, _)| geometry::dist2(x, y)).fold(f64::INFINITY, f64::min);
            Ok(if best.is_finite() {
                RadiusOutcome::finite(dim_root(lambda, config.dim()) * best.sqrt())
            } else {
                RadiusOutcome::infinite()
            })
        }
        _ => {
            let (with_x, idx) = insert(config, x, mark);
            radius_at(&with_x, lambda, idx, rule)
        }
    }
}

fn insert(config: &MarkedConfiguration, x: &[f64], mark: f64) -> (MarkedConfiguration, usize) {
    let mut with_x = config.clone();
    with_x.push_unchecked(x, mark);
    (with_x, config.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCell {
    pub lambda: f64,
    pub point: Vec<f64>,
    pub exceedance: Vec<f64>,
}

/// `τ̂(t)`: per `t`, the maximum over sampled `(λ, x)` cells of the Monte
/// Carlo exceedance fraction `P[R(x, λ) > t]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub t: Vec<f64>,
    pub tau_hat: Vec<f64>,
    /// Binomial standard error of the maximizing cell.
    pub stderr: Vec<f64>,
    /// Replicates per cell.
    pub samples: usize,
    pub lambdas: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub cells: Vec<TailCell>,
}

impl TailEstimate {
    /// `t,tau_hat,stderr,n` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "tau_hat", "stderr", "n"])?;
        for i in 0..self.t.len() {
            w.write_record([
                self.t[i].to_string(),
                self.tau_hat[i].to_string(),
                self.stderr[i].to_string(),
                self.samples.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_grids(lambdas: &[f64], points: &[Vec<f64>], replicates: usize, dim: usize) -> Result<(), StabilizationError> {
    if lambdas.is_empty() || points.is_empty() {
        return Err(StabilizationError::InvalidArgument("λ grid and x grid must be nonempty".into()));
    }
    if replicates == 0 {
        return Err(StabilizationError::InvalidArgument("replicates must be ≥ 1".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 1.0 && l.is_finite())) {
        return Err(StabilizationError::InvalidArgument(format!("λ = {l} must be ≥ 1")));
    }
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(StabilizationError::InvalidArgument(format!("point {p:?} is not {dim}-dimensional")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn empirical_tau(
    functional: &Functional,
    rule: &RadiusRule,
    density: &Density,
    lambdas: &[f64],
    points: &[Vec<f64>],
    replicates: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<TailEstimate, StabilizationError> {
    rule.check_compatible(functional)?;
    check_grids(lambdas, points, replicates, density.dim())?;
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(StabilizationError::InvalidArgument("t grid must be nonempty and increasing".into()));
    }
    let mut cells = Vec::new();
    for (li, &lambda) in lambdas.iter().enumerate() {
        for (pi, point) in points.iter().enumerate() {
            let cell_id = (li * points.len() + pi) as u32;
            let radii: Result<Vec<RadiusOutcome>, StabilizationError> = (0..replicates)
                .into_par_iter()
                .map(|r| {
                    let mut rng = rng::replicate_stream(seed, cell_id, r as u32);
                    let config = sample_poisson_with(lambda, density, &mut rng)?;
                    let mark: f64 = rng.random();
                    radius_inserted(&config, lambda, point, mark, rule)
                })
                .collect();
            let radii = radii?;
            let exceedance = t_grid
                .iter()
                .map(|&t| radii.iter().filter(|r| r.exceeds(t)).count() as f64 / replicates as f64)
                .collect();
            cells.push(TailCell {
                lambda,
                point: point.clone(),
                exceedance,
            });
        }
    }
    let mut tau_hat = Vec::with_capacity(t_grid.len());
    let mut stderr = Vec::with_capacity(t_grid.len());
    for ti in 0..t_grid.len() {
        let best = cells.iter().map(|c| c.exceedance[ti]).fold(0.0, f64::max);
        tau_hat.push(best);
        stderr.push((best * (1.0 - best) / replicates as f64).sqrt());
    }
    Ok(TailEstimate {
        t: t_grid.to_vec(),
        tau_hat,
        stderr,
        samples: replicates,
        lambdas: lambdas.to_vec(),
        points: points.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum DecayClass {
    /// `log τ̂` linear in `t` with slope `-rate`.
    ExponentialConsistent { rate: f64 },
    /// `log τ̂` linear in `log t` with slope `-gamma`.
    Polynomial { gamma: f64 },
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayReport {
    pub class: DecayClass,
    pub exponential_fit: Option<LinearFit>,
    pub polynomial_fit: Option<LinearFit>,
}

pub const DECAY_R2_THRESHOLD: f64 = 0.95;

/// Least-squares fits of `log τ̂` against `t` and against `log t` over the
/// grid points with `τ̂ > 0`; the better fit wins if its `R² ≥ 0.95`.
pub fn classify_decay(tail: &TailEstimate) -> DecayReport {
    let (ts, logs): (Vec<f64>, Vec<f64>) = tail
        .t
        .iter()
        .zip(&tail.tau_hat)
        .filter(|(t, tau)| **tau > 0.0 && **t > 0.0)
        .map(|(t, tau)| (*t, tau.ln()))
        .unzip();
    if ts.len() < 4 {
        return DecayReport {
            class: DecayClass::Inconclusive,
            exponential_fit: None,
            polynomial_fit: None,
        };
    }
    let exp_fit = fit_line(&ts, &logs).ok();
    let log_ts: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let poly_fit = fit_line(&log_ts, &logs).ok();
    let class = match (exp_fit, poly_fit) {
        (Some(e), Some(p)) if e.r2 >= p.r2 && e.r2 >= DECAY_R2_THRESHOLD && e.slope < 0.0 => {
            DecayClass::ExponentialConsistent { rate: -e.slope }
        }
        (_, Some(p)) if p.r2 >= DECAY_R2_THRESHOLD && p.slope < 0.0 => DecayClass::Polynomial { gamma: -p.slope },
        (Some(e), _) if e.r2 >= DECAY_R2_THRESHOLD && e.slope < 0.0 => DecayClass::ExponentialConsistent { rate: -e.slope },
        _ => DecayClass::Inconclusive,
    };
    DecayReport {
        class,
        exponential_fit: exp_fit,
        polynomial_fit: poly_fit,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCell {
    pub lambda: f64,
    pub point: Vec<f64>,
    pub estimate: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    /// Largest cell estimate of `E|ξ_λ((x,U); P_λ)|^p`.
    pub value: f64,
    pub stderr: f64,
    pub cells: Vec<MomentCell>,
}

/// Monte Carlo `E|ξ_λ((x, U); P_λ ∪ {(x, U)})|^p` per `(λ, x)` cell.
#[allow(clippy::too_many_arguments)]
pub fn empirical_moment(
    functional: &Functional,
    p: f64,
    density: &Density,
    lambdas: &[f64],
    points: &[Vec<f64>],
    replicates: usize,
    seed: u64,
) -> Result<MomentEstimate, StabilizationError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(StabilizationError::InvalidArgument(format!("p = {p} must be > 0")));
    }
    check_grids(lambdas, points, replicates, density.dim())?;
    functional.validate()?;
    let mut cells = Vec::new();
    for (li, &lambda) in lambdas.iter().enumerate() {
        for (pi, point) in points.iter().enumerate() {
            let cell_id = (li * points.len() + pi) as u32;
            let samples: Result<Vec<f64>, StabilizationError> = (0..replicates)
                .into_par_iter()
                .map(|r| {
                    let mut rng = rng::replicate_stream(seed, cell_id, r as u32);
                    let config = sample_poisson_with(lambda, density, &mut rng)?;
                    let mark: f64 = rng.random();
                    let (with_x, idx) = insert(&config, point, mark);
                    if with_x.len() < functional.min_points() {
                        return Ok(0.0);
                    }
                    let value = evaluate_rescaled(functional, lambda, &with_x, idx)?;
                    Ok(value.abs().powf(p))
                })
                .collect();
            let samples = samples?;
            let n = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / n;
            let var = if samples.len() > 1 {
                samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            cells.push(MomentCell {
                lambda,
                point: point.clone(),
                estimate: mean,
                stderr: (var / n).sqrt(),
            });
        }
    }
    let best = cells
        .iter()
        .max_by(|a, b| a.estimate.total_cmp(&b.estimate))
        .expect("grids are nonempty");
    Ok(MomentEstimate {
        value: best.estimate,
        stderr: best.stderr,
        cells: cells.clone(),
    })
}
