//! Sample a marked Poisson process on the unit square, print a few points and
//! check the count against λ. Pass a different λ as the first argument.

use stablab::point_process::{dim_root, sample_poisson, Density, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lambda: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1000.0);
    let density = Density::uniform(Domain::unit_cube(2));
    let config = sample_poisson(lambda, &density, 42)?;
    println!("λ = {lambda}: {} points (sd {:.1})", config.len(), lambda.sqrt());

    for (x, mark) in config.iter().take(5) {
        println!("  ({:.4}, {:.4})  mark {mark:.4}", x[0], x[1]);
    }

    // the scaled process has unit intensity
    let scaled = config.scale(dim_root(lambda, 2));
    let side = dim_root(lambda, 2);
    println!("scaled window side {side:.2}, intensity {:.3}", scaled.len() as f64 / (side * side));

    // a piecewise-constant density: three times as many points on the right
    let grid = Density::grid(Domain::unit_cube(2), vec![2, 1], vec![0.5, 1.5])?;
    let skewed = sample_poisson(lambda, &grid, 42)?;
    let right = skewed.iter().filter(|(x, _)| x[0] >= 0.5).count();
    println!("grid density: {right} of {} points on the right half", skewed.len());
    Ok(())
}
