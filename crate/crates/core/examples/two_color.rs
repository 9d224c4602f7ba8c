//! Two-color nearest-neighbor mismatch with a position-dependent color
//! threshold, and a direct check that it stabilizes at the nearest-neighbor
//! distance.

use stablab::functionals::{evaluate_rescaled, two_color_mismatch, ColorThreshold, Functional};
use stablab::point_process::{sample_poisson, Density, Domain};
use stablab::stabilization::{radius_at, verify_stabilization, RadiusRule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let density = Density::uniform(Domain::unit_cube(2));
    let lambda = 800.0;
    let config = sample_poisson(lambda, &density, 21)?;

    // red is likelier on the left
    let q = ColorThreshold::Linear {
        intercept: 0.8,
        coefficients: vec![-0.6, 0.0],
    };
    let xi = two_color_mismatch(&config, &q)?;
    println!("{} of {} points disagree with their nearest neighbor", xi.total, config.len());

    let f = Functional::TwoColorMismatch { q };
    for x in [0, 1, 2] {
        let r = radius_at(&config, lambda, x, &RadiusRule::NearestNeighbor)?;
        let check = verify_stabilization(&f, lambda, &density, &config, x, r.radius, 500, 1)?;
        println!(
            "x = {x}: ξ = {}, R = {:.3}, {} violations in {} trials",
            evaluate_rescaled(&f, lambda, &config, x)?,
            r.radius,
            check.violations,
            check.trials
        );
        // half the radius is usually too small
        let short = verify_stabilization(&f, lambda, &density, &config, x, 0.5 * r.radius, 500, 1)?;
        println!("       R/2: {} violations", short.violations);
    }
    Ok(())
}
