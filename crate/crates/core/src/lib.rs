//! Stabilizing functionals of marked Poisson processes.
//!
//! Sample a marked Poisson process ([`point_process`]), evaluate per-point
//! functionals on it ([`functionals`]), pair the resulting weighted measures
//! with test functions ([`measures`]), estimate stabilization radii and their
//! tails ([`stabilization`]), run Monte Carlo normal-approximation experiments
//! ([`harness`]) and evaluate the dependency-graph bounds ([`bounds`]).

// Range guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod config;
pub mod functionals;
pub mod geometry;
pub mod harness;
pub mod measures;
pub mod point_process;
pub mod rng;
pub mod stabilization;
