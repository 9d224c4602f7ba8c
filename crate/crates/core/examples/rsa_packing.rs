//! Random sequential adsorption: balls arrive in mark order and are kept
//! unless they overlap an earlier kept ball. Prints the packing density of
//! the scaled process for a few radii.

use stablab::functionals::{rescaled_values, unit_volume_radius, Functional};
use stablab::point_process::{sample_poisson, Density, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lambda = 4000.0;
    let config = sample_poisson(lambda, &Density::uniform(Domain::unit_cube(2)), 5)?;
    let r0 = unit_volume_radius(2);
    for scale in [0.25, 0.5, 1.0, 1.5] {
        let r = scale * r0;
        let xi = rescaled_values(&Functional::RsaPacking { r }, lambda, &config)?;
        println!("r = {r:.3}: {} packed of {} ({:.3})", xi.total, config.len(), xi.total / config.len() as f64);
    }
    Ok(())
}
