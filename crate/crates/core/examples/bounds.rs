//! The arithmetic behind the normal-approximation rates: the Chen–Shao
//! bound, the cube dependency graph and its degree, `ρ_λ` choices and the
//! two rate expressions.

use stablab::bounds::{
    build_dependency_graph, chen_shao_bound, rho_exponential, rho_polynomial, theorem1_rhs, theorem2_exponent,
    ChenShaoInput, RateParameters,
};
use stablab::point_process::{build_cube_partition, Density, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cs = chen_shao_bound(&ChenShaoInput {
        q: 3.0,
        d: 2,
        v: 100,
        theta: 0.1,
    })?;
    println!("Chen–Shao, q = 3, D = 2, |V| = 100, θ = 0.1: {cs}");

    for (dim, lambda) in [(1, 10.0), (2, 100.0), (3, 512.0)] {
        let partition = build_cube_partition(lambda, 1.0, &Density::uniform(Domain::unit_cube(dim)))?;
        let graph = build_dependency_graph(&partition);
        println!(
            "d = {dim}: {} cubes, max degree {}, D = {} (≤ 7^d = {})",
            graph.len(),
            graph.max_degree,
            graph.degree_for_bound(),
            7u64.pow(dim as u32)
        );
    }

    let lambda = 1e4;
    println!("ρ = log λ: {:.4}", rho_exponential(lambda, 1.0)?);
    let poly = rho_polynomial(lambda, 4.0, 1400.0, 2.0, 1.0)?;
    println!("ρ = λ^a: a = {:.6}, ρ = {:.4}", poly.a, poly.rho);

    let rhs = theorem1_rhs(
        &RateParameters {
            d: 2.0,
            p: 4.0,
            q: 3.0,
            gamma: 1400.0,
            lambda,
            variance: 0.126 * lambda,
        },
        1.0,
    )?;
    println!("exponential stabilization rate at λ = 10⁴: {rhs:.4e}");
    println!("polynomial rate exponent, p = 4, γ = 1400, d = 2: {:.6}", theorem2_exponent(4.0, 1400.0, 2.0)?);
    Ok(())
}
