//! Batch front end: `experiment`, `tails`, `verify-stab` and `bounds`.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for runtime
//! failures.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::bounds::{self, ChenShaoInput, RateParameters};
use crate::config::{BoundsSpec, Config, ConfigError, RuleSpec};
use crate::functionals::Functional;
use crate::harness::{run_experiment, HarnessError};
use crate::point_process::{sample_poisson_with, Density, MarkedConfiguration, MarkedPoint};
use crate::rng;
use crate::stabilization::{
    classify_decay, empirical_moment, empirical_tau, radius_at, verify_stabilization, RadiusRule, StabilizationError,
};

pub const THREADS_ENV: &str = "STABLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "stablab", version, about = "Stabilizing functionals of marked Poisson processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo distribution of T_λ over the λ grid.
    Experiment(RunArgs),
    /// Empirical tail of the stabilization radius.
    Tails(RunArgs),
    /// Perturbation check of a stabilization radius.
    VerifyStab(RunArgs),
    /// Evaluate the bound and rate expressions.
    Bounds(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Experiment(_) => "experiment",
            Self::Tails(_) => "tails",
            Self::VerifyStab(_) => "verify-stab",
            Self::Bounds(_) => "bounds",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Self::Experiment(a) | Self::Tails(a) | Self::VerifyStab(a) | Self::Bounds(a) => a,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Job configuration (TOML).
    pub config: PathBuf,
    /// Override the configured master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: $STABLAB_THREADS, else all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) => 3,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::InvalidConfig(m) => Self::Config(ConfigError::Range {
                key: "experiment".into(),
                line: None,
                message: m,
            }),
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<StabilizationError> for CliError {
    fn from(e: StabilizationError) -> Self {
        match e {
            StabilizationError::IncompatibleRule { .. } | StabilizationError::InvalidArgument(_) => {
                Self::Config(ConfigError::Range {
                    key: "rule".into(),
                    line: None,
                    message: e.to_string(),
                })
            }
            other => Self::Runtime(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
    pub suite: &'static str,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Errors go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("stablab {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

fn threads(args: &RunArgs) -> Result<Option<usize>, CliError> {
    if args.threads.is_some() {
        return Ok(args.threads);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map(Some).map_err(|_| {
            CliError::Config(ConfigError::Range {
                key: THREADS_ENV.into(),
                line: None,
                message: format!("`{v}` is not a thread count"),
            })
        }),
        Err(_) => Ok(None),
    }
}

pub fn run(command: &Command) -> Result<(), CliError> {
    let args = command.args();
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let mut config = Config::load(&args.config)?;
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let threads = threads(args)?;
    std::fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;

    let job = || match command {
        Command::Experiment(_) => experiment(&config, &base, &args.out),
        Command::Tails(_) => tails(&config, &base, &args.out),
        Command::VerifyStab(_) => verify(&config, &base, &args.out),
        Command::Bounds(_) => write_json(&args.out.join("summary.json"), &json!({ "bounds": bounds_report(config.bounds.as_ref()) })),
    };
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(job),
        None => job(),
    }?;

    let manifest = RunManifest {
        config_path: args.config.clone(),
        output_dir: args.out.clone(),
        suite: command.name(),
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        threads,
        started_unix_seconds: started_unix,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&args.out.join("manifest.json"), &manifest)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

fn create(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::create(path).map_err(|e| io_err(path, e))
}

fn experiment(config: &Config, base: &Path, out: &Path) -> Result<(), CliError> {
    let job = config.experiment(base)?;
    let result = run_experiment(&job)?;
    let csv_err = |name: &str, e: csv::Error| io_err(&out.join(name), e);
    result.write_raw_csv(create(&out.join("raw.csv"))?).map_err(|e| csv_err("raw.csv", e))?;
    result
        .write_variance_csv(create(&out.join("var_scaling.csv"))?)
        .map_err(|e| csv_err("var_scaling.csv", e))?;
    result.write_ks_csv(create(&out.join("ks_vs_lambda.csv"))?).map_err(|e| csv_err("ks_vs_lambda.csv", e))?;
    let mut summary = serde_json::to_value(&result).map_err(|e| CliError::Runtime(e.to_string()))?;
    if let (Some(b), Value::Object(map)) = (&config.bounds, &mut summary) {
        map.insert("bounds".into(), bounds_report(Some(b)));
    }
    write_json(&out.join("summary.json"), &summary)
}

fn radius_rule(spec: &RuleSpec, functional: &Functional) -> Result<RadiusRule, CliError> {
    Ok(match spec {
        RuleSpec::NearestNeighbor => RadiusRule::NearestNeighbor,
        RuleSpec::Probe { radius } => RadiusRule::Probe { radius: *radius },
        RuleSpec::ComponentExtent => match functional {
            Functional::IndependenceRatio { b, .. } => RadiusRule::ComponentExtent { b: *b },
            other => {
                return Err(CliError::Config(ConfigError::Range {
                    key: "rule".into(),
                    line: None,
                    message: format!("component-extent needs kind = \"independence-ratio\", got {}", other.name()),
                }))
            }
        },
    })
}

fn center(density: &Density) -> Vec<f64> {
    let d = density.domain();
    d.lower().iter().zip(d.upper()).map(|(a, b)| 0.5 * (a + b)).collect()
}

fn tails(config: &Config, base: &Path, out: &Path) -> Result<(), CliError> {
    let spec = config.tails.as_ref().ok_or(ConfigError::Missing { key: "tails".into() })?;
    let functional = config.require_functional()?;
    let density = config.density.load(base)?;
    let seed = config.require_seed()?;
    let lambdas = spec
        .lambdas
        .clone()
        .or_else(|| config.lambdas.clone())
        .ok_or(ConfigError::Missing { key: "tails.lambda".into() })?;
    let points = spec.points.clone().unwrap_or_else(|| vec![center(&density)]);
    let replicates = spec
        .replicates
        .or(config.replicates)
        .ok_or(ConfigError::Missing { key: "tails.replicates".into() })?;
    let rule = radius_rule(&spec.rule, functional)?;
    let tail = empirical_tau(functional, &rule, &density, &lambdas, &points, replicates, &spec.t, seed)?;
    let path = out.join("tail.csv");
    tail.write_csv(create(&path)?).map_err(|e| io_err(&path, e))?;
    let moment = match spec.moment_p {
        Some(p) => Some(empirical_moment(functional, p, &density, &lambdas, &points, replicates, seed)?),
        None => None,
    };
    let summary = json!({
        "functional": functional,
        "rule": rule,
        "tail": tail,
        "decay": classify_decay(&tail),
        "moment": moment,
    });
    write_json(&out.join("summary.json"), &summary)
}

fn verify(config: &Config, base: &Path, out: &Path) -> Result<(), CliError> {
    let spec = config.verify.as_ref().ok_or(ConfigError::Missing { key: "verify".into() })?;
    let functional = config.require_functional()?;
    let density = config.density.load(base)?;
    let seed = config.require_seed()?;
    let lambda = spec
        .lambda
        .or_else(|| config.lambdas.as_ref().and_then(|l| l.first().copied()))
        .ok_or(ConfigError::Missing { key: "verify.lambda".into() })?;
    let x = spec.x.clone().unwrap_or_else(|| center(&density));
    if x.len() != density.dim() {
        return Err(CliError::Config(ConfigError::Range {
            key: "verify.x".into(),
            line: None,
            message: format!("expected {} coordinates", density.dim()),
        }));
    }
    let rule = radius_rule(&spec.rule, functional)?;
    rule.check_compatible(functional)?;
    // The base sample uses a stream disjoint from the perturbation trials.
    let mut rng = rng::replicate_stream(seed, u32::MAX, 0);
    let others = sample_poisson_with(lambda, &density, &mut rng).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mark = spec.mark.unwrap_or_else(|| rng.random());
    // x goes first so it keeps index 0
    let mut sample = MarkedConfiguration::from_points(density.dim(), [MarkedPoint::new(x.clone(), mark)])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    sample.extend_from(&others);
    let radius = radius_at(&sample, lambda, 0, &rule)?;
    let check = verify_stabilization(functional, lambda, &density, &sample, 0, radius.radius, spec.trials, seed)?;
    let summary = json!({
        "functional": functional,
        "rule": rule,
        "lambda": lambda,
        "x": x,
        "mark": mark,
        "points": sample.len(),
        "radius": radius,
        "trials": check.trials,
        "violations": check.violations,
        "baseline": check.baseline,
    });
    write_json(&out.join("summary.json"), &summary)
}

fn outcome(r: Result<Value, bounds::BoundsError>) -> Value {
    r.unwrap_or_else(|e| json!({ "error": e.to_string() }))
}

/// Every expression whose inputs are present in `[bounds]`.
pub fn bounds_report(spec: Option<&BoundsSpec>) -> Value {
    let default = BoundsSpec::default();
    let b = spec.unwrap_or(&default);
    let c = b.c.unwrap_or(1.0);
    let mut map = Map::new();
    if let (Some(q), Some(d), Some(v), Some(theta)) = (b.q, b.degree, b.vertices, b.theta) {
        let input = ChenShaoInput { q, d, v, theta };
        map.insert("chen_shao".into(), outcome(bounds::chen_shao_bound(&input).map(|x| json!(x))));
    }
    if let (Some(lambda), Some(alpha)) = (b.lambda, b.alpha) {
        map.insert("rho_exponential".into(), outcome(bounds::rho_exponential(lambda, alpha).map(|x| json!(x))));
    }
    if let (Some(lambda), Some(p), Some(gamma), Some(d)) = (b.lambda, b.p, b.gamma, b.d) {
        map.insert("rho_polynomial".into(), outcome(bounds::rho_polynomial(lambda, p, gamma, d, c).map(|x| json!(x))));
    }
    if let (Some(lambda), Some(d), Some(q), Some(variance)) = (b.lambda, b.d, b.q, b.variance) {
        let params = RateParameters {
            d,
            p: b.p.unwrap_or(f64::NAN),
            q,
            gamma: b.gamma.unwrap_or(f64::NAN),
            lambda,
            variance,
        };
        map.insert("theorem1_rhs".into(), outcome(bounds::theorem1_rhs(&params, c).map(|x| json!(x))));
    }
    if let (Some(p), Some(gamma), Some(d)) = (b.p, b.gamma, b.d) {
        let value = bounds::theorem2_exponent(p, gamma, d).map(|exponent| {
            let rhs = b.lambda.map(|l| c * l.powf(exponent));
            json!({ "exponent": exponent, "rhs": rhs })
        });
        map.insert("theorem2".into(), outcome(value));
    }
    Value::Object(map)
}
