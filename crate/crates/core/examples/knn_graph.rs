//! k-nearest-neighbor graph length as a sum of per-point scores, and the
//! pairing `⟨f, μ_λ⟩` with a box indicator.

use stablab::functionals::{evaluate, rescaled_values, Functional};
use stablab::measures::{build_measure, integrate, TestFunction};
use stablab::point_process::{sample_poisson, Density, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::unit_cube(2);
    let density = Density::uniform(domain.clone());
    let lambda = 2000.0;
    let config = sample_poisson(lambda, &density, 7)?;

    for k in 1..=3 {
        let f = Functional::Knn { k };
        let xi = evaluate(&f, &config)?;
        let scaled = rescaled_values(&f, lambda, &config)?;
        println!(
            "k = {k}: graph length {:.4}, scaled {:.2}, per point {:.4}",
            xi.total,
            scaled.total,
            scaled.total / config.len() as f64
        );
    }

    let f = Functional::Knn { k: 1 };
    let mu = build_measure(&f, lambda, &config, &domain)?;
    let left = TestFunction::BoxIndicator {
        lower: vec![0.0, 0.0],
        upper: vec![0.5, 1.0],
    };
    println!(
        "⟨1, μ⟩ = {:.2}, ⟨1_left, μ⟩ = {:.2}",
        integrate(&mu, &TestFunction::default()),
        integrate(&mu, &left)
    );
    Ok(())
}
