//! Job configuration files.
//!
//! The format is TOML: `key = value` lines with `[section]` headers. Top-level
//! keys describe the functional and the experiment; sections hold the density,
//! the test function, the partition rule and the per-subcommand settings.
//! Unknown keys are errors. The full grammar is in `docs/config.md`.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::functionals::{ColorThreshold, Functional};
use crate::geometry::MAX_COMPONENT_CAP;
use crate::harness::{ExperimentConfig, RhoRule};
use crate::measures::TestFunction;
use crate::point_process::{Density, Domain, ProcessError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("{}`{key}`: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Range {
        key: String,
        line: Option<usize>,
        message: String,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("density grid {path}: {source}")]
    Density {
        path: PathBuf,
        #[source]
        source: ProcessError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    Uniform { lower: Vec<f64>, upper: Vec<f64> },
    /// Grid CSV, relative paths resolved against the config file directory.
    Grid { path: PathBuf },
}

impl Default for DensitySpec {
    fn default() -> Self {
        Self::Uniform {
            lower: vec![0.0; 2],
            upper: vec![1.0; 2],
        }
    }
}

impl DensitySpec {
    pub fn load(&self, base: &Path) -> Result<Density, ConfigError> {
        match self {
            Self::Uniform { lower, upper } => {
                let domain = Domain::new(lower.clone(), upper.clone()).map_err(|e| ConfigError::Range {
                    key: "density".into(),
                    line: None,
                    message: e.to_string(),
                })?;
                Ok(Density::uniform(domain))
            }
            Self::Grid { path } => {
                let path = base.join(path);
                let file = std::fs::File::open(&path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                Density::from_grid_csv(file).map_err(|source| ConfigError::Density { path, source })
            }
        }
    }
}

/// Radius rule named in `[tails]` and `[verify]`.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleSpec {
    NearestNeighbor,
    /// Uses the `b` of the independence-ratio functional.
    ComponentExtent,
    Probe { radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailsSpec {
    pub rule: RuleSpec,
    /// Defaults to the top-level grid.
    pub lambdas: Option<Vec<f64>>,
    /// Defaults to the center of the domain.
    pub points: Option<Vec<Vec<f64>>>,
    /// Defaults to `m`.
    pub replicates: Option<usize>,
    pub t: Vec<f64>,
    /// Also estimate `E|ξ_λ|^p`.
    pub moment_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySpec {
    pub rule: RuleSpec,
    /// Defaults to the first top-level `λ`.
    pub lambda: Option<f64>,
    /// Defaults to the center of the domain.
    pub x: Option<Vec<f64>>,
    /// Mark of the inserted point, default 0.5.
    pub mark: Option<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundsSpec {
    pub q: Option<f64>,
    pub degree: Option<u64>,
    pub vertices: Option<u64>,
    pub theta: Option<f64>,
    pub p: Option<f64>,
    pub gamma: Option<f64>,
    pub d: Option<f64>,
    pub lambda: Option<f64>,
    pub variance: Option<f64>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub functional: Option<Functional>,
    pub lambdas: Option<Vec<f64>>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub density: DensitySpec,
    pub test_function: TestFunction,
    pub rho: Option<RhoRule>,
    pub tails: Option<TailsSpec>,
    pub verify: Option<VerifySpec>,
    pub bounds: Option<BoundsSpec>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Option<String>,
    k: Option<usize>,
    s: Option<f64>,
    delta: Option<usize>,
    r: Option<f64>,
    b: Option<f64>,
    cap: Option<usize>,
    q: Option<f64>,
    q_intercept: Option<f64>,
    q_coefficients: Option<Vec<f64>>,
    lambda: Option<Vec<f64>>,
    m: Option<usize>,
    seed: Option<u64>,
    density: Option<RawDensity>,
    test_function: Option<RawTestFunction>,
    rho: Option<RawRho>,
    tails: Option<RawTails>,
    verify: Option<RawVerify>,
    bounds: Option<RawBounds>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    kind: String,
    d: Option<usize>,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
    path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTestFunction {
    kind: String,
    value: Option<f64>,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
    intercept: Option<f64>,
    coefficients: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRho {
    kind: String,
    alpha: Option<f64>,
    p: Option<f64>,
    gamma: Option<f64>,
    c: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTails {
    rule: String,
    radius: Option<f64>,
    lambda: Option<Vec<f64>>,
    points: Option<Vec<Vec<f64>>>,
    replicates: Option<usize>,
    t: Option<Vec<f64>>,
    moment_p: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    rule: String,
    radius: Option<f64>,
    lambda: Option<f64>,
    x: Option<Vec<f64>>,
    mark: Option<f64>,
    trials: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBounds {
    q: Option<f64>,
    #[serde(rename = "D")]
    degree: Option<u64>,
    #[serde(rename = "V")]
    vertices: Option<u64>,
    theta: Option<f64>,
    p: Option<f64>,
    gamma: Option<f64>,
    d: Option<f64>,
    lambda: Option<f64>,
    variance: Option<f64>,
    #[serde(rename = "C")]
    c: Option<f64>,
    alpha: Option<f64>,
}

/// 1-based line and column of a byte offset.
fn locate(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.chars().rev().take_while(|c| *c != '\n').count() + 1;
    (line, column)
}

/// Line of `key = …` inside `[section]` (top level when `None`).
fn key_line(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            continue;
        }
        if current.as_deref() != section {
            continue;
        }
        if let Some(rest) = line.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return Some(i + 1);
            }
        }
    }
    None
}

struct Checker<'a> {
    text: &'a str,
    section: Option<&'static str>,
}

impl Checker<'_> {
    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let full = match self.section {
            Some(s) => format!("{s}.{key}"),
            None => key.to_string(),
        };
        ConfigError::Range {
            line: key_line(self.text, self.section, key),
            key: full,
            message: message.into(),
        }
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError::Missing {
            key: match self.section {
                Some(s) => format!("{s}.{key}"),
                None => key.to_string(),
            },
        }
    }

    fn require<T>(&self, key: &str, value: Option<T>) -> Result<T, ConfigError> {
        value.ok_or_else(|| self.missing(key))
    }

    fn positive(&self, key: &str, value: f64) -> Result<f64, ConfigError> {
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(self.err(key, format!("{value} must be > 0")))
        }
    }

    fn finite(&self, key: &str, values: &[f64]) -> Result<(), ConfigError> {
        match values.iter().find(|v| !v.is_finite()) {
            Some(v) => Err(self.err(key, format!("{v} is not finite"))),
            None => Ok(()),
        }
    }

    fn increasing(&self, key: &str, values: &[f64], min: f64) -> Result<(), ConfigError> {
        if values.is_empty() {
            return Err(self.err(key, "must be nonempty"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= min && v.is_finite())) {
            return Err(self.err(key, format!("{v} must be ≥ {min}")));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(self.err(key, "must be strictly increasing"));
        }
        Ok(())
    }

    /// Rejects keys that were set but have no meaning in context.
    fn unused(&self, context: &str, keys: &[(&str, bool)]) -> Result<(), ConfigError> {
        match keys.iter().find(|(_, set)| *set) {
            Some((key, _)) => Err(self.err(key, format!("does not apply to {context}"))),
            None => Ok(()),
        }
    }
}

fn parse_functional(raw: &RawConfig, c: &Checker) -> Result<Option<Functional>, ConfigError> {
    let Some(kind) = raw.kind.as_deref() else {
        c.unused(
            "a config without `kind`",
            &[
                ("k", raw.k.is_some()),
                ("s", raw.s.is_some()),
                ("delta", raw.delta.is_some()),
                ("r", raw.r.is_some()),
                ("b", raw.b.is_some()),
                ("cap", raw.cap.is_some()),
                ("q", raw.q.is_some()),
                ("q_intercept", raw.q_intercept.is_some()),
                ("q_coefficients", raw.q_coefficients.is_some()),
            ],
        )?;
        return Ok(None);
    };
    let ctx = format!("kind = \"{kind}\"");
    let k = |default: Option<usize>| -> Result<usize, ConfigError> {
        let k = match (raw.k, default) {
            (Some(k), _) => k,
            (None, Some(d)) => d,
            (None, None) => return Err(c.missing("k")),
        };
        if k == 0 {
            return Err(c.err("k", "k = 0 must be ≥ 1"));
        }
        Ok(k)
    };
    let no_q = [
        ("q", raw.q.is_some()),
        ("q_intercept", raw.q_intercept.is_some()),
        ("q_coefficients", raw.q_coefficients.is_some()),
    ];
    let functional = match kind {
        "knn" => {
            c.unused(&ctx, &[("s", raw.s.is_some()), ("delta", raw.delta.is_some()), ("r", raw.r.is_some()), ("b", raw.b.is_some()), ("cap", raw.cap.is_some())])?;
            c.unused(&ctx, &no_q)?;
            Functional::Knn { k: k(None)? }
        }
        "knn-distance-indicator" => {
            c.unused(&ctx, &[("delta", raw.delta.is_some()), ("r", raw.r.is_some()), ("b", raw.b.is_some()), ("cap", raw.cap.is_some())])?;
            c.unused(&ctx, &no_q)?;
            Functional::KnnDistanceIndicator {
                k: k(Some(1))?,
                s: c.positive("s", c.require("s", raw.s)?)?,
            }
        }
        "two-color-mismatch" => {
            c.unused(&ctx, &[("k", raw.k.is_some()), ("s", raw.s.is_some()), ("delta", raw.delta.is_some()), ("r", raw.r.is_some()), ("b", raw.b.is_some()), ("cap", raw.cap.is_some())])?;
            let q = match (raw.q, raw.q_intercept, &raw.q_coefficients) {
                (Some(v), None, None) => {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(c.err("q", format!("{v} must lie in [0, 1]")));
                    }
                    ColorThreshold::Constant { value: v }
                }
                (None, Some(intercept), Some(coefficients)) => {
                    c.finite("q_intercept", &[intercept])?;
                    c.finite("q_coefficients", coefficients)?;
                    ColorThreshold::Linear {
                        intercept,
                        coefficients: coefficients.clone(),
                    }
                }
                (Some(_), _, _) => return Err(c.err("q", "give either `q` or `q_intercept` with `q_coefficients`")),
                (None, None, None) => return Err(c.missing("q")),
                (None, Some(_), None) => return Err(c.missing("q_coefficients")),
                (None, None, Some(_)) => return Err(c.missing("q_intercept")),
            };
            Functional::TwoColorMismatch { q }
        }
        "voronoi-half-length" | "sig-half-degree" => {
            c.unused(&ctx, &[("k", raw.k.is_some()), ("s", raw.s.is_some()), ("delta", raw.delta.is_some()), ("r", raw.r.is_some()), ("b", raw.b.is_some()), ("cap", raw.cap.is_some())])?;
            c.unused(&ctx, &no_q)?;
            if kind == "voronoi-half-length" {
                Functional::VoronoiHalfLength
            } else {
                Functional::SigHalfDegree
            }
        }
        "sig-degree-indicator" => {
            c.unused(&ctx, &[("k", raw.k.is_some()), ("s", raw.s.is_some()), ("r", raw.r.is_some()), ("b", raw.b.is_some()), ("cap", raw.cap.is_some())])?;
            c.unused(&ctx, &no_q)?;
            Functional::SigDegreeIndicator {
                delta: c.require("delta", raw.delta)?,
            }
        }
        "rsa-packing" => {
            c.unused(&ctx, &[("k", raw.k.is_some()), ("s", raw.s.is_some()), ("delta", raw.delta.is_some()), ("b", raw.b.is_some()), ("cap", raw.cap.is_some())])?;
            c.unused(&ctx, &no_q)?;
            Functional::RsaPacking {
                r: c.positive("r", c.require("r", raw.r)?)?,
            }
        }
        "independence-ratio" => {
            c.unused(&ctx, &[("k", raw.k.is_some()), ("s", raw.s.is_some()), ("delta", raw.delta.is_some()), ("r", raw.r.is_some())])?;
            c.unused(&ctx, &no_q)?;
            let cap = raw.cap.unwrap_or(crate::geometry::DEFAULT_COMPONENT_CAP);
            if cap == 0 || cap > MAX_COMPONENT_CAP {
                return Err(c.err("cap", format!("{cap} must be in 1..={MAX_COMPONENT_CAP}")));
            }
            Functional::IndependenceRatio {
                b: c.positive("b", c.require("b", raw.b)?)?,
                cap,
            }
        }
        other => {
            return Err(c.err(
                "kind",
                format!(
                    "unknown kind \"{other}\"; expected one of knn, knn-distance-indicator, two-color-mismatch, \
                     voronoi-half-length, sig-half-degree, sig-degree-indicator, rsa-packing, independence-ratio"
                ),
            ))
        }
    };
    Ok(Some(functional))
}

fn parse_density(raw: Option<RawDensity>, text: &str) -> Result<DensitySpec, ConfigError> {
    let c = Checker {
        text,
        section: Some("density"),
    };
    let Some(raw) = raw else {
        return Ok(DensitySpec::default());
    };
    match raw.kind.as_str() {
        "uniform" => {
            c.unused("kind = \"uniform\"", &[("path", raw.path.is_some())])?;
            let (lower, upper) = match (raw.lower, raw.upper) {
                (Some(l), Some(u)) => (l, u),
                (None, None) => {
                    let d = raw.d.unwrap_or(2);
                    if d == 0 {
                        return Err(c.err("d", "must be ≥ 1"));
                    }
                    (vec![0.0; d], vec![1.0; d])
                }
                (Some(_), None) => return Err(c.missing("upper")),
                (None, Some(_)) => return Err(c.missing("lower")),
            };
            if let Some(d) = raw.d {
                if d != lower.len() {
                    return Err(c.err("d", format!("{d} disagrees with the {}-dimensional box", lower.len())));
                }
            }
            if let Err(e) = Domain::new(lower.clone(), upper.clone()) {
                return Err(c.err("lower", e.to_string()));
            }
            Ok(DensitySpec::Uniform { lower, upper })
        }
        "grid" => {
            c.unused(
                "kind = \"grid\"",
                &[("d", raw.d.is_some()), ("lower", raw.lower.is_some()), ("upper", raw.upper.is_some())],
            )?;
            Ok(DensitySpec::Grid {
                path: c.require("path", raw.path)?,
            })
        }
        other => Err(c.err("kind", format!("unknown density \"{other}\"; expected uniform or grid"))),
    }
}

fn parse_test_function(raw: Option<RawTestFunction>, text: &str) -> Result<TestFunction, ConfigError> {
    let c = Checker {
        text,
        section: Some("test_function"),
    };
    let Some(raw) = raw else {
        return Ok(TestFunction::default());
    };
    let f = match raw.kind.as_str() {
        "constant" => {
            c.unused("kind = \"constant\"", &[("lower", raw.lower.is_some()), ("upper", raw.upper.is_some()), ("intercept", raw.intercept.is_some()), ("coefficients", raw.coefficients.is_some())])?;
            let value = raw.value.unwrap_or(1.0);
            c.finite("value", &[value])?;
            TestFunction::Constant { value }
        }
        "box" => {
            c.unused("kind = \"box\"", &[("value", raw.value.is_some()), ("intercept", raw.intercept.is_some()), ("coefficients", raw.coefficients.is_some())])?;
            let lower = c.require("lower", raw.lower)?;
            let upper = c.require("upper", raw.upper)?;
            if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
                return Err(c.err("upper", "must have the length of `lower` and dominate it"));
            }
            TestFunction::BoxIndicator { lower, upper }
        }
        "linear" => {
            c.unused("kind = \"linear\"", &[("value", raw.value.is_some()), ("lower", raw.lower.is_some()), ("upper", raw.upper.is_some())])?;
            let intercept = raw.intercept.unwrap_or(0.0);
            let coefficients = c.require("coefficients", raw.coefficients)?;
            c.finite("intercept", &[intercept])?;
            c.finite("coefficients", &coefficients)?;
            TestFunction::Linear { intercept, coefficients }
        }
        other => return Err(c.err("kind", format!("unknown test function \"{other}\"; expected constant, box or linear"))),
    };
    Ok(f)
}

fn parse_rho(raw: Option<RawRho>, text: &str) -> Result<Option<RhoRule>, ConfigError> {
    let c = Checker {
        text,
        section: Some("rho"),
    };
    let Some(raw) = raw else {
        return Ok(None);
    };
    let rule = match raw.kind.as_str() {
        "exponential" => {
            c.unused("kind = \"exponential\"", &[("p", raw.p.is_some()), ("gamma", raw.gamma.is_some()), ("c", raw.c.is_some())])?;
            RhoRule::Exponential {
                alpha: c.positive("alpha", raw.alpha.unwrap_or(1.0))?,
            }
        }
        "polynomial" => {
            c.unused("kind = \"polynomial\"", &[("alpha", raw.alpha.is_some())])?;
            RhoRule::Polynomial {
                p: c.positive("p", c.require("p", raw.p)?)?,
                gamma: c.positive("gamma", c.require("gamma", raw.gamma)?)?,
                c: c.positive("c", raw.c.unwrap_or(1.0))?,
            }
        }
        other => return Err(c.err("kind", format!("unknown rule \"{other}\"; expected exponential or polynomial"))),
    };
    Ok(Some(rule))
}

fn parse_rule(c: &Checker, rule: &str, radius: Option<f64>) -> Result<RuleSpec, ConfigError> {
    let spec = match rule {
        "nn-distance" => RuleSpec::NearestNeighbor,
        "component-extent" => RuleSpec::ComponentExtent,
        "probe" => {
            return Ok(RuleSpec::Probe {
                radius: c.positive("radius", c.require("radius", radius)?)?,
            })
        }
        other => return Err(c.err("rule", format!("unknown rule \"{other}\"; expected nn-distance, component-extent or probe"))),
    };
    c.unused(&format!("rule = \"{rule}\""), &[("radius", radius.is_some())])?;
    Ok(spec)
}

fn parse_tails(raw: Option<RawTails>, text: &str) -> Result<Option<TailsSpec>, ConfigError> {
    let c = Checker {
        text,
        section: Some("tails"),
    };
    let Some(raw) = raw else {
        return Ok(None);
    };
    let rule = parse_rule(&c, &raw.rule, raw.radius)?;
    if let Some(l) = &raw.lambda {
        c.increasing("lambda", l, 1.0)?;
    }
    if let Some(points) = &raw.points {
        if points.is_empty() {
            return Err(c.err("points", "must be nonempty"));
        }
        for p in points {
            c.finite("points", p)?;
        }
    }
    if raw.replicates == Some(0) {
        return Err(c.err("replicates", "must be ≥ 1"));
    }
    let t = c.require("t", raw.t)?;
    c.increasing("t", &t, f64::MIN_POSITIVE)?;
    if let Some(p) = raw.moment_p {
        c.positive("moment_p", p)?;
    }
    Ok(Some(TailsSpec {
        rule,
        lambdas: raw.lambda,
        points: raw.points,
        replicates: raw.replicates,
        t,
        moment_p: raw.moment_p,
    }))
}

fn parse_verify(raw: Option<RawVerify>, text: &str) -> Result<Option<VerifySpec>, ConfigError> {
    let c = Checker {
        text,
        section: Some("verify"),
    };
    let Some(raw) = raw else {
        return Ok(None);
    };
    let rule = parse_rule(&c, &raw.rule, raw.radius)?;
    if let Some(l) = raw.lambda {
        if !(l >= 1.0 && l.is_finite()) {
            return Err(c.err("lambda", format!("{l} must be ≥ 1")));
        }
    }
    if let Some(x) = &raw.x {
        c.finite("x", x)?;
    }
    if let Some(m) = raw.mark {
        if !(0.0..=1.0).contains(&m) {
            return Err(c.err("mark", format!("{m} must lie in [0, 1]")));
        }
    }
    let trials = raw.trials.unwrap_or(1000);
    if trials == 0 {
        return Err(c.err("trials", "must be ≥ 1"));
    }
    Ok(Some(VerifySpec {
        rule,
        lambda: raw.lambda,
        x: raw.x,
        mark: raw.mark,
        trials,
    }))
}

fn parse_bounds(raw: Option<RawBounds>, text: &str) -> Result<Option<BoundsSpec>, ConfigError> {
    let c = Checker {
        text,
        section: Some("bounds"),
    };
    let Some(raw) = raw else {
        return Ok(None);
    };
    for (key, value) in [
        ("q", raw.q),
        ("theta", raw.theta),
        ("p", raw.p),
        ("gamma", raw.gamma),
        ("d", raw.d),
        ("lambda", raw.lambda),
        ("variance", raw.variance),
        ("C", raw.c),
        ("alpha", raw.alpha),
    ] {
        if let Some(v) = value {
            c.positive(key, v)?;
        }
    }
    if raw.degree == Some(0) {
        return Err(c.err("D", "must be ≥ 1"));
    }
    if raw.vertices == Some(0) {
        return Err(c.err("V", "must be ≥ 1"));
    }
    Ok(Some(BoundsSpec {
        q: raw.q,
        degree: raw.degree,
        vertices: raw.vertices,
        theta: raw.theta,
        p: raw.p,
        gamma: raw.gamma,
        d: raw.d,
        lambda: raw.lambda,
        variance: raw.variance,
        c: raw.c,
        alpha: raw.alpha,
    }))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map(|s| locate(text, s.start)).unwrap_or((0, 0));
            ConfigError::Syntax {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        let top = Checker { text, section: None };
        let functional = parse_functional(&raw, &top)?;
        if let Some(l) = &raw.lambda {
            top.increasing("lambda", l, 2.0)?;
        }
        if let Some(m) = raw.m {
            if m < 2 {
                return Err(top.err("m", format!("{m} must be ≥ 2")));
            }
        }
        Ok(Self {
            functional,
            lambdas: raw.lambda,
            replicates: raw.m,
            seed: raw.seed,
            density: parse_density(raw.density, text)?,
            test_function: parse_test_function(raw.test_function, text)?,
            rho: parse_rho(raw.rho, text)?,
            tails: parse_tails(raw.tails, text)?,
            verify: parse_verify(raw.verify, text)?,
            bounds: parse_bounds(raw.bounds, text)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn require_functional(&self) -> Result<&Functional, ConfigError> {
        self.functional.as_ref().ok_or(ConfigError::Missing { key: "kind".into() })
    }

    pub fn require_seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or(ConfigError::Missing { key: "seed".into() })
    }

    /// Experiment job; relative density paths resolve against `base`.
    pub fn experiment(&self, base: &Path) -> Result<ExperimentConfig, ConfigError> {
        Ok(ExperimentConfig {
            functional: self.require_functional()?.clone(),
            density: self.density.load(base)?,
            test_function: self.test_function.clone(),
            lambdas: self.lambdas.clone().ok_or(ConfigError::Missing { key: "lambda".into() })?,
            replicates: self.replicates.ok_or(ConfigError::Missing { key: "m".into() })?,
            seed: self.require_seed()?,
            rho: self.rho.clone(),
        })
    }

    /// TOML text that parses back to `self`.
    pub fn render(&self) -> String {
        use toml::{Table, Value};
        fn floats(v: &[f64]) -> Value {
            Value::Array(v.iter().map(|x| Value::Float(*x)).collect())
        }
        fn int(v: impl TryInto<i64>) -> Value {
            Value::Integer(v.try_into().unwrap_or(i64::MAX))
        }
        fn rule(t: &mut Table, r: &RuleSpec) {
            let name = match r {
                RuleSpec::NearestNeighbor => "nn-distance",
                RuleSpec::ComponentExtent => "component-extent",
                RuleSpec::Probe { radius } => {
                    t.insert("radius".into(), Value::Float(*radius));
                    "probe"
                }
            };
            t.insert("rule".into(), Value::String(name.into()));
        }

        let mut top = Table::new();
        if let Some(f) = &self.functional {
            top.insert("kind".into(), Value::String(f.name().into()));
            match f {
                Functional::Knn { k } => {
                    top.insert("k".into(), int(*k));
                }
                Functional::KnnDistanceIndicator { k, s } => {
                    top.insert("k".into(), int(*k));
                    top.insert("s".into(), Value::Float(*s));
                }
                Functional::TwoColorMismatch { q } => match q {
                    ColorThreshold::Constant { value } => {
                        top.insert("q".into(), Value::Float(*value));
                    }
                    ColorThreshold::Linear {
                        intercept,
                        coefficients,
                    } => {
                        top.insert("q_intercept".into(), Value::Float(*intercept));
                        top.insert("q_coefficients".into(), floats(coefficients));
                    }
                },
                Functional::VoronoiHalfLength | Functional::SigHalfDegree => {}
                Functional::SigDegreeIndicator { delta } => {
                    top.insert("delta".into(), int(*delta));
                }
                Functional::RsaPacking { r } => {
                    top.insert("r".into(), Value::Float(*r));
                }
                Functional::IndependenceRatio { b, cap } => {
                    top.insert("b".into(), Value::Float(*b));
                    top.insert("cap".into(), int(*cap));
                }
            }
        }
        if let Some(l) = &self.lambdas {
            top.insert("lambda".into(), floats(l));
        }
        if let Some(m) = self.replicates {
            top.insert("m".into(), int(m));
        }
        if let Some(s) = self.seed {
            top.insert("seed".into(), int(s));
        }

        let mut density = Table::new();
        match &self.density {
            DensitySpec::Uniform { lower, upper } => {
                density.insert("kind".into(), Value::String("uniform".into()));
                density.insert("lower".into(), floats(lower));
                density.insert("upper".into(), floats(upper));
            }
            DensitySpec::Grid { path } => {
                density.insert("kind".into(), Value::String("grid".into()));
                density.insert("path".into(), Value::String(path.to_string_lossy().into_owned()));
            }
        }
        top.insert("density".into(), Value::Table(density));

        let mut tf = Table::new();
        match &self.test_function {
            TestFunction::Constant { value } => {
                tf.insert("kind".into(), Value::String("constant".into()));
                tf.insert("value".into(), Value::Float(*value));
            }
            TestFunction::BoxIndicator { lower, upper } => {
                tf.insert("kind".into(), Value::String("box".into()));
                tf.insert("lower".into(), floats(lower));
                tf.insert("upper".into(), floats(upper));
            }
            TestFunction::Linear {
                intercept,
                coefficients,
            } => {
                tf.insert("kind".into(), Value::String("linear".into()));
                tf.insert("intercept".into(), Value::Float(*intercept));
                tf.insert("coefficients".into(), floats(coefficients));
            }
        }
        top.insert("test_function".into(), Value::Table(tf));

        if let Some(rho) = &self.rho {
            let mut t = Table::new();
            match rho {
                RhoRule::Exponential { alpha } => {
                    t.insert("kind".into(), Value::String("exponential".into()));
                    t.insert("alpha".into(), Value::Float(*alpha));
                }
                RhoRule::Polynomial { p, gamma, c } => {
                    t.insert("kind".into(), Value::String("polynomial".into()));
                    t.insert("p".into(), Value::Float(*p));
                    t.insert("gamma".into(), Value::Float(*gamma));
                    t.insert("c".into(), Value::Float(*c));
                }
            }
            top.insert("rho".into(), Value::Table(t));
        }
        if let Some(tails) = &self.tails {
            let mut t = Table::new();
            rule(&mut t, &tails.rule);
            if let Some(l) = &tails.lambdas {
                t.insert("lambda".into(), floats(l));
            }
            if let Some(points) = &tails.points {
                t.insert("points".into(), Value::Array(points.iter().map(|p| floats(p)).collect()));
            }
            if let Some(r) = tails.replicates {
                t.insert("replicates".into(), int(r));
            }
            t.insert("t".into(), floats(&tails.t));
            if let Some(p) = tails.moment_p {
                t.insert("moment_p".into(), Value::Float(p));
            }
            top.insert("tails".into(), Value::Table(t));
        }
        if let Some(v) = &self.verify {
            let mut t = Table::new();
            rule(&mut t, &v.rule);
            if let Some(l) = v.lambda {
                t.insert("lambda".into(), Value::Float(l));
            }
            if let Some(x) = &v.x {
                t.insert("x".into(), floats(x));
            }
            if let Some(m) = v.mark {
                t.insert("mark".into(), Value::Float(m));
            }
            t.insert("trials".into(), int(v.trials));
            top.insert("verify".into(), Value::Table(t));
        }
        if let Some(b) = &self.bounds {
            let mut t = Table::new();
            let fields = [
                ("q", b.q),
                ("theta", b.theta),
                ("p", b.p),
                ("gamma", b.gamma),
                ("d", b.d),
                ("lambda", b.lambda),
                ("variance", b.variance),
                ("C", b.c),
                ("alpha", b.alpha),
            ];
            for (key, value) in fields {
                if let Some(v) = value {
                    t.insert(key.into(), Value::Float(v));
                }
            }
            if let Some(d) = b.degree {
                t.insert("D".into(), int(d));
            }
            if let Some(v) = b.vertices {
                t.insert("V".into(), int(v));
            }
            top.insert("bounds".into(), Value::Table(t));
        }
        toml::to_string(&top).expect("tables of plain values always serialize")
    }
}
