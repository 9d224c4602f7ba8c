//! Independence number of a random geometric graph, computed exactly per
//! connected component. The per-point ratios sum back to β.

use stablab::functionals::{rescaled_values, Functional};
use stablab::geometry::{components, independence_number, GeometricGraph};
use stablab::point_process::{dim_root, sample_poisson, Density, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lambda = 2000.0;
    let b = 0.3f64.sqrt();
    let config = sample_poisson(lambda, &Density::uniform(Domain::unit_cube(2)), 17)?;

    let scaled = config.scale(dim_root(lambda, 2));
    let graph = GeometricGraph::build(scaled.coords(), 2, b);
    let comps = components(&graph);
    let largest = comps.iter().map(Vec::len).max().unwrap_or(0);
    let mut beta = 0;
    for comp in &comps {
        beta += independence_number(&graph, comp, 40)?;
    }
    println!("{} points, {} components, largest {largest}, β = {beta}", config.len(), comps.len());

    let xi = rescaled_values(&Functional::IndependenceRatio { b, cap: 40 }, lambda, &config)?;
    println!("Σ ξ = {:.6}", xi.total);

    // above the percolation threshold the exact solver refuses
    let dense = rescaled_values(&Functional::IndependenceRatio { b: 1.5, cap: 40 }, lambda, &config);
    if let Err(e) = dense {
        println!("b = 1.5: {e}");
    }
    Ok(())
}
