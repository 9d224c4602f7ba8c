mod common;

use proptest::prelude::*;
use rand::Rng;
use stablab::geometry::voronoi_cells;

fn assert_cells_match(points: &[[f64; 2]]) {
    let cells = voronoi_cells(points).unwrap();
    let oracle = common::voronoi_finite_lengths(points);
    for (cell, want) in cells.iter().zip(&oracle) {
        let got = cell.finite_length();
        assert!(
            (got - want).abs() <= 1e-9 * want.max(1.0),
            "cell {}: {got} vs half-plane oracle {want}",
            cell.generator
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn per_cell_lengths_match_half_plane_clipping(n in 3usize..150, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let points: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
        assert_cells_match(&points);
    }
}

#[test]
fn jittered_lattice() {
    let mut rng = common::rng(3);
    let points: Vec<[f64; 2]> = (0..100)
        .map(|i| {
            let (x, y) = ((i % 10) as f64, (i / 10) as f64);
            [x + 1e-3 * rng.random::<f64>(), y + 1e-3 * rng.random::<f64>()]
        })
        .collect();
    assert_cells_match(&points);
}

#[test]
fn bounded_cells_are_interior() {
    let mut rng = common::rng(5);
    let points: Vec<[f64; 2]> = (0..400).map(|_| [rng.random(), rng.random()]).collect();
    let cells = voronoi_cells(&points).unwrap();
    let bounded = cells.iter().filter(|c| c.is_bounded()).count();
    // only hull generators have unbounded cells
    assert!(bounded > 350 && bounded < 400, "{bounded}");
}
