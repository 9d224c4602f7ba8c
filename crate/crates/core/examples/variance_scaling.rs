//! Monte Carlo study of `T_λ = ⟨1, μ_λ⟩` for the nearest-neighbor graph:
//! `Var T_λ / λ` settles and the standardized law approaches the normal.
//! Writes the three CSV tables into the directory given as the first
//! argument (default `variance_out`).

use std::fs::File;
use std::path::PathBuf;

use stablab::functionals::Functional;
use stablab::harness::{run_experiment, ExperimentConfig, RhoRule};
use stablab::measures::TestFunction;
use stablab::point_process::{Density, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "variance_out".into()));
    std::fs::create_dir_all(&out)?;
    let config = ExperimentConfig {
        functional: Functional::Knn { k: 1 },
        density: Density::uniform(Domain::unit_cube(2)),
        test_function: TestFunction::default(),
        lambdas: vec![128.0, 256.0, 512.0, 1024.0],
        replicates: 500,
        seed: 2024,
        rho: Some(RhoRule::Exponential { alpha: 1.0 }),
    };
    let result = run_experiment(&config)?;

    for s in &result.per_lambda {
        println!(
            "λ = {:6}: mean {:9.3}, Var/λ {:.4}, KS {:.4}",
            s.lambda,
            s.mean,
            s.variance_over_lambda,
            s.ks.unwrap_or(f64::NAN)
        );
    }
    if let Some(fit) = result.variance_fit {
        println!("log-log variance slope {:.3} (R² {:.4}), σ² ≈ {:.4}", fit.slope, fit.r2, result.sigma2.unwrap_or(f64::NAN));
    }

    result.write_raw_csv(File::create(out.join("raw.csv"))?)?;
    result.write_variance_csv(File::create(out.join("var_scaling.csv"))?)?;
    result.write_ks_csv(File::create(out.join("ks_vs_lambda.csv"))?)?;
    println!("tables written to {}", out.display());
    Ok(())
}
