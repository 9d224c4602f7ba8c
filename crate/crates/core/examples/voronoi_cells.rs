//! Voronoi tessellation of a Poisson sample: half the finite edge length per
//! cell, summed, equals the total finite edge length.

use stablab::functionals::{evaluate, Functional};
use stablab::geometry::{finite_edge_total, voronoi_cells};
use stablab::point_process::{sample_poisson, Density, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = sample_poisson(500.0, &Density::uniform(Domain::unit_cube(2)), 3)?;
    let points: Vec<[f64; 2]> = config.iter().map(|(x, _)| [x[0], x[1]]).collect();
    let cells = voronoi_cells(&points)?;
    let bounded = cells.iter().filter(|c| c.is_bounded()).count();
    println!("{} cells, {bounded} bounded", cells.len());

    let total = finite_edge_total(&cells);
    let xi = evaluate(&Functional::VoronoiHalfLength, &config)?;
    println!("finite edge length {total:.6}, Σ ξ = {:.6}", xi.total);

    let c = &cells[0];
    println!("cell of generator {}: {} edges, length {:.4}", c.generator, c.finite_edges.len(), c.finite_length());
    Ok(())
}
