//! Tail of the stabilization radius, `τ̂(t) = max P[R > t]`, for the
//! nearest-neighbor and component rules, with a decay classification and a
//! moment estimate.

use stablab::functionals::Functional;
use stablab::point_process::{Density, Domain};
use stablab::stabilization::{classify_decay, empirical_moment, empirical_tau, RadiusRule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let density = Density::uniform(Domain::unit_cube(2));
    let lambdas = [200.0, 800.0];
    let points = [vec![0.5, 0.5], vec![0.02, 0.5]];
    let ts: Vec<f64> = (1..=10).map(|i| 0.2 * i as f64).collect();

    let nn = empirical_tau(&Functional::Knn { k: 1 }, &RadiusRule::NearestNeighbor, &density, &lambdas, &points, 4000, &ts, 1)?;
    nn.write_csv(std::io::stdout())?;
    println!("nearest neighbor: {:?}", classify_decay(&nn).class);

    let b = 0.5;
    let comp = empirical_tau(
        &Functional::IndependenceRatio { b, cap: 40 },
        &RadiusRule::ComponentExtent { b },
        &density,
        &lambdas,
        &points,
        2000,
        &ts.iter().map(|t| t + 2.0 * b).collect::<Vec<_>>(),
        2,
    )?;
    println!("component extent: {:?}", classify_decay(&comp).class);

    let m = empirical_moment(&Functional::Knn { k: 1 }, 4.0, &density, &lambdas, &points, 2000, 3)?;
    println!("sup E|ξ|⁴ ≈ {:.3} ± {:.3}", m.value, m.stderr);
    Ok(())
}
