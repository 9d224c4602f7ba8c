//! Random weighted point measures `μ_λ = Σ ξ_λ(x; P_λ) δ_x` and their
//! pairings with bounded test functions.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::functionals::{rescaled_values, Functional, FunctionalError};
use crate::point_process::{Domain, MarkedConfiguration};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    dim: usize,
    positions: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedMeasure {
    pub fn new(dim: usize, positions: Vec<f64>, weights: Vec<f64>) -> Self {
        assert_eq!(positions.len(), dim * weights.len());
        assert!(weights.iter().all(|w| w.is_finite()), "atom weights must be finite");
        Self { dim, positions, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.positions.chunks_exact(self.dim.max(1)).zip(self.weights.iter().copied())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_variation(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// `x_1..x_d,weight` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("x_{j}")).collect();
        header.push("weight".into());
        w.write_record(&header)?;
        for (x, weight) in self.atoms() {
            w.write_record(x.iter().chain(std::iter::once(&weight)).map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Bounded test function `f` on `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    Constant { value: f64 },
    /// Indicator of the closed box `∏[lower_j, upper_j]`.
    BoxIndicator { lower: Vec<f64>, upper: Vec<f64> },
    /// `intercept + Σ_j coefficients[j]·x_j`.
    Linear { intercept: f64, coefficients: Vec<f64> },
}

impl Default for TestFunction {
    fn default() -> Self {
        Self::Constant { value: 1.0 }
    }
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::BoxIndicator { lower, upper } => {
                let inside = x
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(v, (lo, hi))| v >= lo && v <= hi);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Linear {
                intercept,
                coefficients,
            } => intercept + coefficients.iter().zip(x).map(|(c, v)| c * v).sum::<f64>(),
        }
    }

    /// `sup_{x∈A} |f(x)|`.
    pub fn sup_abs(&self, domain: &Domain) -> f64 {
        match self {
            Self::Constant { value } => value.abs(),
            Self::BoxIndicator { .. } => 1.0,
            Self::Linear {
                intercept,
                coefficients,
            } => {
                // A linear form attains its extremes at box corners; pick each
                // coordinate to push the form up (resp. down).
                let (mut hi, mut lo) = (*intercept, *intercept);
                for (axis, c) in coefficients.iter().enumerate().take(domain.dim()) {
                    let (a, b) = (c * domain.lower()[axis], c * domain.upper()[axis]);
                    hi += a.max(b);
                    lo += a.min(b);
                }
                hi.abs().max(lo.abs())
            }
        }
    }
}

/// One atom per point of `config` inside `domain`, weighted by `ξ_λ`.
pub fn build_measure(
    functional: &Functional,
    lambda: f64,
    config: &MarkedConfiguration,
    domain: &Domain,
) -> Result<WeightedMeasure, FunctionalError> {
    if config.is_empty() {
        return Ok(WeightedMeasure::new(config.dim(), Vec::new(), Vec::new()));
    }
    let xi = rescaled_values(functional, lambda, config)?;
    let mut positions = Vec::with_capacity(config.coords().len());
    let mut weights = Vec::with_capacity(config.len());
    for ((x, _), w) in config.iter().zip(xi.per_point) {
        if domain.contains(x) {
            positions.extend_from_slice(x);
            weights.push(w);
        }
    }
    Ok(WeightedMeasure::new(config.dim(), positions, weights))
}

/// `⟨f, μ⟩ = Σ f(x)·weight`.
pub fn integrate(measure: &WeightedMeasure, f: &TestFunction) -> f64 {
    measure.atoms().map(|(x, w)| f.eval(x) * w).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{evaluate, ColorThreshold};
    use crate::point_process::MarkedPoint;
    use approx::assert_relative_eq;

    fn hand_measure() -> WeightedMeasure {
        WeightedMeasure::new(2, vec![0.1, 0.2, 0.5, 0.5, 0.9, 0.3], vec![2.0, -1.0, 4.0])
    }

    #[test]
    fn empty_configuration_gives_empty_measure() {
        let m = build_measure(&Functional::Knn { k: 1 }, 10.0, &MarkedConfiguration::empty(2), &Domain::unit_cube(2)).unwrap();
        assert!(m.is_empty());
        assert_eq!(integrate(&m, &TestFunction::default()), 0.0);
    }

    #[test]
    fn constant_pairing_is_scaled_mass() {
        let m = hand_measure();
        assert_relative_eq!(integrate(&m, &TestFunction::Constant { value: 3.0 }), 15.0);
    }

    #[test]
    fn box_pairing() {
        let f = TestFunction::BoxIndicator {
            lower: vec![0.0, 0.0],
            upper: vec![0.6, 0.6],
        };
        assert_relative_eq!(integrate(&hand_measure(), &f), 1.0);
    }

    #[test]
    fn first_coordinate_pairing() {
        let f = TestFunction::Linear {
            intercept: 0.0,
            coefficients: vec![1.0, 0.0],
        };
        // 0.1·2 − 0.5·1 + 0.9·4
        assert_relative_eq!(integrate(&hand_measure(), &f), 3.3, max_relative = 1e-12);
    }

    #[test]
    fn two_color_atoms() {
        let c = MarkedConfiguration::from_points(
            2,
            [
                MarkedPoint::new(vec![0.2, 0.2], 0.2),
                MarkedPoint::new(vec![0.4, 0.2], 0.9),
            ],
        )
        .unwrap();
        let f = Functional::TwoColorMismatch {
            q: ColorThreshold::constant(0.5),
        };
        let m = build_measure(&f, 50.0, &c, &Domain::unit_cube(2)).unwrap();
        assert_eq!(m.weights(), &[1.0, 1.0]);
    }

    #[test]
    fn unit_pairing_is_the_scaled_functional() {
        let density = crate::point_process::Density::uniform(Domain::unit_cube(2));
        let lambda = 300.0;
        let c = crate::point_process::sample_poisson(lambda, &density, 17).unwrap();
        let f = Functional::IndependenceRatio { b: 0.5, cap: 40 };
        let m = build_measure(&f, lambda, &c, density.domain()).unwrap();
        let direct = evaluate(&f, &c.scale(lambda.sqrt())).unwrap().total;
        assert_relative_eq!(integrate(&m, &TestFunction::default()), direct, max_relative = 1e-12);
    }

    #[test]
    fn linear_sup_on_box() {
        let f = TestFunction::Linear {
            intercept: -0.5,
            coefficients: vec![2.0, -1.0],
        };
        // extremes: −0.5 + 2 − 0 = 1.5 and −0.5 + 0 − 1 = −1.5
        assert_relative_eq!(f.sup_abs(&Domain::unit_cube(2)), 1.5);
    }
}
