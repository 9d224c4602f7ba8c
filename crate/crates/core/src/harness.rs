//! Monte Carlo experiments over a grid of intensities: replicate values of
//! `T_λ = ⟨f, μ_λ⟩`, variance scaling, Kolmogorov distance to the standard
//! normal, and log-log rate fits.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, build_dependency_graph, BoundsError};
use crate::functionals::Functional;
use crate::measures::{build_measure, integrate, TestFunction};
use crate::point_process::{build_cube_partition, sample_poisson_with, Density, ProcessError};
use crate::rng;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("value {value} at position {index} must be positive")]
    NonPositive { index: usize, value: f64 },
    #[error("empty sample")]
    Empty,
    #[error("{failed} of {total} replicates failed at λ = {lambda} (first: {first})")]
    TooManyFailures {
        lambda: f64,
        failed: usize,
        total: usize,
        first: String,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// `Φ(t) = erfc(−t/√2)/2`.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// `sup_t |F̂(t) − Φ(t)|` over the jumps of the empirical CDF, taking both
/// one-sided limits at each jump. Tied samples form a single jump.
pub fn ks_distance(samples: &[f64]) -> Result<f64, HarnessError> {
    if samples.is_empty() {
        return Err(HarnessError::Empty);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut best: f64 = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let phi = normal_cdf(sorted[start]);
        best = best.max((phi - start as f64 / n).abs()).max((end as f64 / n - phi).abs());
        start = end;
    }
    Ok(best)
}

/// `(x − mean)/sd` with the sample mean and the `n − 1` sample SD; `None`
/// when fewer than two samples or the spread is zero.
pub fn standardize(samples: &[f64]) -> Option<Vec<f64>> {
    let (mean, var) = mean_variance(samples)?;
    let sd = var.sqrt();
    if !(sd > 0.0 && sd.is_finite()) {
        return None;
    }
    Some(samples.iter().map(|v| (v - mean) / sd).collect())
}

fn mean_variance(samples: &[f64]) -> Option<(f64, f64)> {
    if samples.len() < 2 {
        return None;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LinearFit, HarnessError> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return Err(HarnessError::TooFewPoints {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(HarnessError::InvalidConfig("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(LinearFit { slope, intercept, r2 })
}

/// Least squares on `(log x, log y)`.
pub fn fit_scaling(xs: &[f64], ys: &[f64]) -> Result<LinearFit, HarnessError> {
    if xs.len() < 3 {
        return Err(HarnessError::TooFewPoints {
            needed: 3,
            got: xs.len(),
        });
    }
    for (index, &value) in xs.iter().chain(ys).enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(HarnessError::NonPositive {
                index: index % xs.len(),
                value,
            });
        }
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly)
}

/// Choice of `ρ_λ` for the cube partition diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RhoRule {
    /// `α log λ`.
    Exponential { alpha: f64 },
    /// `C λ^a` with `a = 25p/(pγ − 6d)`.
    Polynomial { p: f64, gamma: f64, c: f64 },
}

impl RhoRule {
    pub fn rho(&self, lambda: f64, dim: usize) -> Result<f64, BoundsError> {
        match self {
            Self::Exponential { alpha } => bounds::rho_exponential(lambda, *alpha),
            Self::Polynomial { p, gamma, c } => Ok(bounds::rho_polynomial(lambda, *p, *gamma, dim as f64, *c)?.rho),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub functional: Functional,
    pub density: Density,
    pub test_function: TestFunction,
    /// Increasing, each `≥ 2`.
    pub lambdas: Vec<f64>,
    /// Replicates per `λ`, `≥ 2`.
    pub replicates: usize,
    pub seed: u64,
    pub rho: Option<RhoRule>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if self.lambdas.is_empty() {
            return bad("λ grid is empty".into());
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(**l >= 2.0 && l.is_finite())) {
            return bad(format!("λ = {l} must be ≥ 2"));
        }
        if self.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return bad("λ grid must be strictly increasing".into());
        }
        if self.replicates < 2 {
            return bad(format!("m = {} must be ≥ 2", self.replicates));
        }
        self.functional
            .validate()
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replicate {
    /// NaN when the replicate failed.
    pub value: f64,
    /// `None` on success, otherwise the error message.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionDiagnostics {
    pub rho: f64,
    pub side: f64,
    pub cubes: usize,
    /// Self-inclusive maximal degree of the cube dependency graph.
    pub degree: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSummary {
    pub lambda: f64,
    #[serde(skip)]
    pub replicates: Vec<Replicate>,
    pub succeeded: usize,
    pub failed: usize,
    pub mean: f64,
    pub variance: f64,
    pub variance_over_lambda: f64,
    /// `None` when the values cannot be standardized.
    pub ks: Option<f64>,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionDiagnostics>,
}

impl LambdaSummary {
    pub fn values(&self) -> Vec<f64> {
        self.replicates.iter().filter(|r| r.error.is_none()).map(|r| r.value).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentMetadata {
    pub functional: Functional,
    pub test_function: TestFunction,
    pub seed: u64,
    pub replicates: usize,
    pub stream_rule: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub per_lambda: Vec<LambdaSummary>,
    /// `log Var T_λ` against `log λ`.
    pub variance_fit: Option<LinearFit>,
    /// `exp(intercept)` of the variance fit.
    pub sigma2: Option<f64>,
    /// `log KS` against `log λ`.
    pub ks_fit: Option<LinearFit>,
    pub metadata: ExperimentMetadata,
}

/// Standard deviation of `√m·D_m` under the Kolmogorov law.
const KOLMOGOROV_SD: f64 = 0.2603;

impl ExperimentResult {
    /// `lambda,replicate,value,status` rows in grid and replicate order.
    pub fn write_raw_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lambda", "replicate", "value", "status"])?;
        for s in &self.per_lambda {
            for (i, r) in s.replicates.iter().enumerate() {
                let status = if r.error.is_some() { "failed" } else { "ok" };
                w.write_record([s.lambda.to_string(), i.to_string(), r.value.to_string(), status.into()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `lambda,variance,stderr`; the error is `s²·√(2/(m−1))`.
    pub fn write_variance_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lambda", "variance", "stderr"])?;
        for s in &self.per_lambda {
            let m = s.succeeded as f64;
            let stderr = s.variance * (2.0 / (m - 1.0)).sqrt();
            w.write_record([s.lambda.to_string(), s.variance.to_string(), stderr.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `lambda,ks,stderr`, skipping degenerate grid points.
    pub fn write_ks_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lambda", "ks", "stderr"])?;
        for s in &self.per_lambda {
            if let Some(ks) = s.ks {
                let stderr = KOLMOGOROV_SD / (s.succeeded as f64).sqrt();
                w.write_record([s.lambda.to_string(), ks.to_string(), stderr.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    run_experiment_with_threads(config, None)
}

/// Runs on a dedicated pool of `threads` workers (the global pool if `None`).
pub fn run_experiment_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    match threads {
        None => run(config),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| HarnessError::ThreadPool(e.to_string()))?
            .install(|| run(config)),
    }
}

fn replicate(config: &ExperimentConfig, li: usize, lambda: f64, rep: usize) -> Replicate {
    let mut rng = rng::replicate_stream(config.seed, li as u32, rep as u32);
    let outcome = sample_poisson_with(lambda, &config.density, &mut rng)
        .map_err(|e| e.to_string())
        .and_then(|sample| {
            build_measure(&config.functional, lambda, &sample, config.density.domain()).map_err(|e| e.to_string())
        });
    match outcome {
        Ok(measure) => Replicate {
            value: integrate(&measure, &config.test_function),
            error: None,
        },
        Err(e) => Replicate {
            value: f64::NAN,
            error: Some(e),
        },
    }
}

fn run(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    let dim = config.density.dim();
    let mut per_lambda = Vec::with_capacity(config.lambdas.len());
    for (li, &lambda) in config.lambdas.iter().enumerate() {
        let replicates: Vec<Replicate> = (0..config.replicates)
            .into_par_iter()
            .map(|rep| replicate(config, li, lambda, rep))
            .collect();
        let failed = replicates.iter().filter(|r| r.error.is_some()).count();
        if failed * 100 > replicates.len() {
            let first = replicates.iter().find_map(|r| r.error.clone()).unwrap_or_default();
            return Err(HarnessError::TooManyFailures {
                lambda,
                failed,
                total: replicates.len(),
                first,
            });
        }
        let values: Vec<f64> = replicates.iter().filter(|r| r.error.is_none()).map(|r| r.value).collect();
        let (mean, variance) = mean_variance(&values).unwrap_or((values.first().copied().unwrap_or(f64::NAN), 0.0));
        let ks = match standardize(&values) {
            Some(z) => Some(ks_distance(&z)?),
            None => None,
        };
        let partition = match &config.rho {
            Some(rule) => {
                let rho = rule.rho(lambda, dim)?;
                let p = build_cube_partition(lambda, rho, &config.density)?;
                let g = build_dependency_graph(&p);
                Some(PartitionDiagnostics {
                    rho,
                    side: p.side(),
                    cubes: p.len(),
                    degree: g.degree_for_bound(),
                })
            }
            None => None,
        };
        per_lambda.push(LambdaSummary {
            lambda,
            succeeded: values.len(),
            failed,
            mean,
            variance,
            variance_over_lambda: variance / lambda,
            degenerate: ks.is_none(),
            ks,
            partition,
            replicates,
        });
    }

    let (lx, vy): (Vec<f64>, Vec<f64>) = per_lambda
        .iter()
        .filter(|s| s.variance > 0.0)
        .map(|s| (s.lambda, s.variance))
        .unzip();
    let variance_fit = fit_scaling(&lx, &vy).ok();
    let (kx, ky): (Vec<f64>, Vec<f64>) = per_lambda
        .iter()
        .filter_map(|s| s.ks.filter(|k| *k > 0.0).map(|k| (s.lambda, k)))
        .unzip();
    let ks_fit = fit_scaling(&kx, &ky).ok();
    Ok(ExperimentResult {
        per_lambda,
        sigma2: variance_fit.map(|f| f.intercept.exp()),
        variance_fit,
        ks_fit,
        metadata: ExperimentMetadata {
            functional: config.functional.clone(),
            test_function: config.test_function.clone(),
            seed: config.seed,
            replicates: config.replicates,
            stream_rule: "ChaCha8 seed_from_u64(seed), stream = (lambda_index << 32) | replicate",
            version: env!("CARGO_PKG_VERSION"),
        },
    })
}
