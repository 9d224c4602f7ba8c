//! Sphere of influence graph: edge count from half degrees, and the
//! fraction of points with a given degree.

use stablab::functionals::{evaluate, sphere_of_influence_graph, Functional};
use stablab::point_process::{sample_poisson, Density, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = sample_poisson(1000.0, &Density::uniform(Domain::unit_cube(2)), 11)?;
    let graph = sphere_of_influence_graph(&config)?;
    let half = evaluate(&Functional::SigHalfDegree, &config)?;
    println!("{} points, {} edges, Σ deg/2 = {}", config.len(), graph.edge_count(), half.total);

    for delta in 0..=8 {
        let xi = evaluate(&Functional::SigDegreeIndicator { delta }, &config)?;
        println!("  degree {delta}: {:.3}", xi.total / config.len() as f64);
    }
    Ok(())
}
