//! Domains, densities, marked Poisson sampling and the cube partition.
//!
//! Marks live in `[0, 1]` with the uniform law. Unmarked functionals simply
//! ignore them.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Poisson;
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("intensity must be finite and nonnegative, got {0}")]
    InvalidIntensity(f64),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("duplicate position at indices {0} and {1}")]
    DuplicatePosition(usize, usize),
    #[error("invalid partition parameters: {0}")]
    InvalidPartition(String),
    #[error("point {index} at {coords:?} lies outside every cube of the partition")]
    OutsidePartition { index: usize, coords: Vec<f64> },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed csv: {0}")]
    CsvFormat(String),
}

/// Axis-aligned compact support `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ProcessError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(ProcessError::InvalidDomain(format!(
                "bounds of lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (axis, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(ProcessError::InvalidDomain(format!(
                    "axis {axis} has extent [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube `[0,1]^d`.
    pub fn unit_cube(dim: usize) -> Self {
        Self::new(vec![0.0; dim], vec![1.0; dim]).expect("dim > 0")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    fn overlap_volume(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let mut v = 1.0;
        for axis in 0..self.dim() {
            let a = lo[axis].max(self.lower[axis]);
            let b = hi[axis].min(self.upper[axis]);
            if b <= a {
                return 0.0;
            }
            v *= b - a;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    Uniform,
    /// Cell probabilities on a regular grid over the domain, row-major with
    /// the last axis varying fastest.
    Grid { counts: Vec<usize>, probs: Vec<f64> },
}

/// Probability density `κ` supported on a box domain.
#[derive(Debug, Clone)]
pub struct Density {
    domain: Domain,
    kind: DensityKind,
    sup: f64,
    cells: Option<WeightedIndex<f64>>,
}

impl PartialEq for Density {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.kind == other.kind
    }
}

impl Density {
    pub fn uniform(domain: Domain) -> Self {
        let sup = 1.0 / domain.volume();
        Self {
            domain,
            kind: DensityKind::Uniform,
            sup,
            cells: None,
        }
    }

    /// Piecewise-constant density from nonnegative cell weights; weights are
    /// normalized to probabilities.
    pub fn grid(domain: Domain, counts: Vec<usize>, weights: Vec<f64>) -> Result<Self, ProcessError> {
        if counts.len() != domain.dim() || counts.contains(&0) {
            return Err(ProcessError::InvalidDensity(format!(
                "cell counts {counts:?} do not match a {}-dimensional domain",
                domain.dim()
            )));
        }
        let expected: usize = counts.iter().product();
        if weights.len() != expected {
            return Err(ProcessError::InvalidDensity(format!(
                "expected {expected} cell weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(ProcessError::InvalidDensity(format!("cell weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(ProcessError::InvalidDensity("all cell weights are zero".into()));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let cell_volume = domain.volume() / expected as f64;
        let sup = probs.iter().cloned().fold(0.0, f64::max) / cell_volume;
        let cells = WeightedIndex::new(&probs)
            .map_err(|e| ProcessError::InvalidDensity(e.to_string()))?;
        Ok(Self {
            domain,
            kind: DensityKind::Grid { counts, probs },
            sup,
            cells: Some(cells),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// `‖κ‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        self.sup
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        match &self.kind {
            DensityKind::Uniform => self.sup,
            DensityKind::Grid { counts, probs } => {
                let cell_volume = self.domain.volume() / probs.len() as f64;
                probs[self.cell_of(counts, x)] / cell_volume
            }
        }
    }

    /// Exact integral of `κ` over the whole domain.
    pub fn total_mass(&self) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::Grid { probs, .. } => probs.iter().sum(),
        }
    }

    /// Exact integral of `κ` over the box `∏[lo_j, hi_j)`.
    pub fn mass_in_box(&self, lo: &[f64], hi: &[f64]) -> f64 {
        match &self.kind {
            DensityKind::Uniform => self.domain.overlap_volume(lo, hi) / self.domain.volume(),
            DensityKind::Grid { counts, probs } => {
                let dim = self.dim();
                // Per-axis ranges of overlapped cells and overlap fractions.
                let mut ranges: Vec<Vec<(usize, f64)>> = Vec::with_capacity(dim);
                for axis in 0..dim {
                    let (dlo, dhi) = (self.domain.lower[axis], self.domain.upper[axis]);
                    let width = (dhi - dlo) / counts[axis] as f64;
                    let a = lo[axis].max(dlo);
                    let b = hi[axis].min(dhi);
                    if b <= a {
                        return 0.0;
                    }
                    let first = (((a - dlo) / width).floor() as usize).min(counts[axis] - 1);
                    let last = ((((b - dlo) / width).ceil() as usize).max(1) - 1).min(counts[axis] - 1);
                    let mut axis_cells = Vec::new();
                    for c in first..=last {
                        let clo = dlo + c as f64 * width;
                        let chi = if c + 1 == counts[axis] { dhi } else { dlo + (c + 1) as f64 * width };
                        let overlap = b.min(chi) - a.max(clo);
                        if overlap > 0.0 {
                            axis_cells.push((c, overlap / (chi - clo)));
                        }
                    }
                    if axis_cells.is_empty() {
                        return 0.0;
                    }
                    ranges.push(axis_cells);
                }
                let mut total = 0.0;
                let mut cursor = vec![0usize; dim];
                loop {
                    let mut flat = 0usize;
                    let mut frac = 1.0;
                    for axis in 0..dim {
                        let (c, f) = ranges[axis][cursor[axis]];
                        flat = flat * counts[axis] + c;
                        frac *= f;
                    }
                    total += probs[flat] * frac;
                    if !advance(&mut cursor, |axis| ranges[axis].len()) {
                        break;
                    }
                }
                total
            }
        }
    }

    fn cell_of(&self, counts: &[usize], x: &[f64]) -> usize {
        let mut flat = 0;
        for (axis, v) in x.iter().enumerate() {
            let (lo, hi) = (self.domain.lower[axis], self.domain.upper[axis]);
            let c = (((v - lo) / (hi - lo)) * counts[axis] as f64).floor() as usize;
            flat = flat * counts[axis] + c.min(counts[axis] - 1);
        }
        flat
    }

    /// Draws one position into `out`.
    pub fn sample_position<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let dim = self.dim();
        match (&self.kind, &self.cells) {
            (DensityKind::Grid { counts, .. }, Some(cells)) => {
                let mut flat = cells.sample(rng);
                let mut idx = vec![0usize; dim];
                for axis in (0..dim).rev() {
                    idx[axis] = flat % counts[axis];
                    flat /= counts[axis];
                }
                for axis in 0..dim {
                    let (lo, hi) = (self.domain.lower[axis], self.domain.upper[axis]);
                    let width = (hi - lo) / counts[axis] as f64;
                    let u: f64 = rng.random();
                    out[axis] = (lo + (idx[axis] as f64 + u) * width).min(hi);
                }
            }
            _ => {
                for (o, (lo, hi)) in out.iter_mut().zip(self.domain.lower.iter().zip(&self.domain.upper)) {
                    let u: f64 = rng.random();
                    *o = lo + u * (hi - lo);
                }
            }
        }
    }

    /// Reads a grid density:
    ///
    /// ```text
    /// d,2
    /// counts,4,2
    /// lower,0,0
    /// upper,1,1
    /// w_0,w_1,...        (any number of rows; row-major, last axis fastest)
    /// ```
    pub fn from_grid_csv<R: Read>(reader: R) -> Result<Self, ProcessError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut dim: Option<usize> = None;
        let mut counts = None;
        let mut lower = None;
        let mut upper = None;
        let mut weights = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
            let numbers = |fields: &[&str]| -> Result<Vec<f64>, ProcessError> {
                fields
                    .iter()
                    .map(|f| {
                        f.parse::<f64>().map_err(|_| {
                            ProcessError::CsvFormat(format!("line {}: bad number {f:?}", line + 1))
                        })
                    })
                    .collect()
            };
            match fields.first().copied() {
                None => {}
                Some("d") => dim = numbers(&fields[1..])?.first().map(|d| *d as usize),
                Some("counts") => counts = Some(numbers(&fields[1..])?.iter().map(|c| *c as usize).collect::<Vec<_>>()),
                Some("lower") => lower = Some(numbers(&fields[1..])?),
                Some("upper") => upper = Some(numbers(&fields[1..])?),
                Some(_) => weights.extend(numbers(&fields)?),
            }
        }
        let missing = |name: &str| ProcessError::CsvFormat(format!("missing `{name}` header row"));
        let dim = dim.ok_or_else(|| missing("d"))?;
        let counts = counts.ok_or_else(|| missing("counts"))?;
        let domain = Domain::new(lower.ok_or_else(|| missing("lower"))?, upper.ok_or_else(|| missing("upper"))?)?;
        if domain.dim() != dim {
            return Err(ProcessError::CsvFormat(format!(
                "d = {dim} but bounds have {} entries",
                domain.dim()
            )));
        }
        Density::grid(domain, counts, weights)
    }

    pub fn write_grid_csv<W: Write>(&self, writer: W) -> Result<(), ProcessError> {
        let DensityKind::Grid { counts, probs } = &self.kind else {
            return Err(ProcessError::InvalidDensity("only grid densities serialize to csv".into()));
        };
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
        w.write_record(["d".to_string(), self.dim().to_string()])?;
        let row = |tag: &str, vals: Vec<String>| {
            std::iter::once(tag.to_string()).chain(vals).collect::<Vec<_>>()
        };
        w.write_record(row("counts", counts.iter().map(|c| c.to_string()).collect()))?;
        w.write_record(row("lower", self.domain.lower.iter().map(|v| v.to_string()).collect()))?;
        w.write_record(row("upper", self.domain.upper.iter().map(|v| v.to_string()).collect()))?;
        let last = *counts.last().unwrap();
        for chunk in probs.chunks(last) {
            w.write_record(chunk.iter().map(|p| p.to_string()))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn advance(cursor: &mut [usize], len: impl Fn(usize) -> usize) -> bool {
    for axis in (0..cursor.len()).rev() {
        cursor[axis] += 1;
        if cursor[axis] < len(axis) {
            return true;
        }
        cursor[axis] = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPoint {
    pub position: Vec<f64>,
    pub mark: f64,
}

impl MarkedPoint {
    pub fn new(position: Vec<f64>, mark: f64) -> Self {
        Self { position, mark }
    }
}

/// Finite marked point set, stored as flat coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkedConfiguration {
    dim: usize,
    coords: Vec<f64>,
    marks: Vec<f64>,
}

impl MarkedConfiguration {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
            marks: Vec::new(),
        }
    }

    /// Validated construction: consistent dimension, marks in `[0,1]`,
    /// pairwise distinct positions.
    pub fn from_points(dim: usize, points: impl IntoIterator<Item = MarkedPoint>) -> Result<Self, ProcessError> {
        let mut config = Self::empty(dim);
        for p in points {
            if p.position.len() != dim {
                return Err(ProcessError::InvalidPoint(format!(
                    "position {:?} is not {dim}-dimensional",
                    p.position
                )));
            }
            if !(0.0..=1.0).contains(&p.mark) {
                return Err(ProcessError::InvalidPoint(format!("mark {} outside [0,1]", p.mark)));
            }
            if p.position.iter().any(|v| !v.is_finite()) {
                return Err(ProcessError::InvalidPoint(format!("non-finite position {:?}", p.position)));
            }
            config.coords.extend_from_slice(&p.position);
            config.marks.push(p.mark);
        }
        config.check_distinct()?;
        Ok(config)
    }

    /// Unmarked points; all marks set to zero.
    pub fn from_positions(dim: usize, positions: &[Vec<f64>]) -> Result<Self, ProcessError> {
        Self::from_points(dim, positions.iter().map(|p| MarkedPoint::new(p.clone(), 0.0)))
    }

    fn check_distinct(&self) -> Result<(), ProcessError> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.position(a)
                .iter()
                .zip(self.position(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            if self.position(w[0]) == self.position(w[1]) {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(ProcessError::DuplicatePosition(a, b));
            }
        }
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, position: &[f64], mark: f64) {
        debug_assert_eq!(position.len(), self.dim);
        self.coords.extend_from_slice(position);
        self.marks.push(mark);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mark(&self, i: usize) -> f64 {
        self.marks[i]
    }

    pub fn marks(&self) -> &[f64] {
        &self.marks
    }

    /// Flat coordinate buffer, `len() * dim()` entries.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> MarkedPoint {
        MarkedPoint::new(self.position(i).to_vec(), self.mark(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coords.chunks_exact(self.dim.max(1)).zip(self.marks.iter().copied())
    }

    /// Index of the point at exactly `position`, if any.
    pub fn find(&self, position: &[f64]) -> Option<usize> {
        (0..self.len()).find(|&i| self.position(i) == position)
    }

    /// Subconfiguration of the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut out = Self::empty(self.dim);
        for &i in indices {
            out.push_unchecked(self.position(i), self.mark(i));
        }
        out
    }

    /// Appends all points of `other` (distinctness is the caller's concern).
    pub fn extend_from(&mut self, other: &MarkedConfiguration) {
        assert_eq!(self.dim, other.dim);
        self.coords.extend_from_slice(&other.coords);
        self.marks.extend_from_slice(&other.marks);
    }

    pub fn translate(&self, offset: &[f64]) -> Self {
        let mut out = self.clone();
        for chunk in out.coords.chunks_exact_mut(self.dim) {
            for (c, o) in chunk.iter_mut().zip(offset) {
                *c += o;
            }
        }
        out
    }

    /// Global dilation `y ↦ factor·y`.
    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.coords.iter_mut().for_each(|c| *c *= factor);
        out
    }

    /// Writes `x_1..x_d,mark` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ProcessError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|j| format!("x_{j}")).collect();
        header.push("mark".into());
        w.write_record(&header)?;
        for (pos, mark) in self.iter() {
            w.write_record(pos.iter().chain(std::iter::once(&mark)).map(|v| v.to_string()))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, ProcessError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 2 || header.get(header.len() - 1) != Some("mark") {
            return Err(ProcessError::CsvFormat("expected header x_1..x_d,mark".into()));
        }
        let dim = header.len() - 1;
        let mut points = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let vals: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| ProcessError::CsvFormat(format!("row {}: {e}", row + 2)))?;
            let mark = vals[dim];
            points.push(MarkedPoint::new(vals[..dim].to_vec(), mark));
        }
        Self::from_points(dim, points)
    }
}

/// Marked Poisson process with intensity `λκ(x)dx × Uniform[0,1]`, seeded.
pub fn sample_poisson(lambda: f64, density: &Density, seed: u64) -> Result<MarkedConfiguration, ProcessError> {
    sample_poisson_with(lambda, density, &mut rng::from_seed(seed))
}

/// Conditional construction: `N ~ Poisson(λ)`, then `N` i.i.d. positions from
/// `κ`, each followed by its uniform mark.
pub fn sample_poisson_with<R: Rng + ?Sized>(
    lambda: f64,
    density: &Density,
    rng: &mut R,
) -> Result<MarkedConfiguration, ProcessError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(ProcessError::InvalidIntensity(lambda));
    }
    let dim = density.dim();
    let mut config = MarkedConfiguration::empty(dim);
    if lambda == 0.0 {
        return Ok(config);
    }
    let count = Poisson::new(lambda)
        .map_err(|e| ProcessError::InvalidDensity(e.to_string()))?
        .sample(rng) as usize;
    config.coords.reserve(count * dim);
    config.marks.reserve(count);
    let mut buf = vec![0.0; dim];
    for _ in 0..count {
        density.sample_position(rng, &mut buf);
        let mark: f64 = rng.random();
        config.push_unchecked(&buf, mark);
    }
    Ok(config)
}

/// Maps every point `y` to `center + factor·(y − center)`; marks unchanged.
pub fn rescale_about(center: &[f64], factor: f64, config: &MarkedConfiguration) -> MarkedConfiguration {
    assert!(factor.is_finite() && factor > 0.0, "dilation factor must be positive, got {factor}");
    assert_eq!(center.len(), config.dim());
    let mut out = config.clone();
    let dim = config.dim();
    for chunk in out.coords.chunks_exact_mut(dim) {
        for (c, z) in chunk.iter_mut().zip(center) {
            *c = z + factor * (*c - z);
        }
    }
    out
}

/// `λ^{1/d}`, computed with `sqrt`/`cbrt` where those are exact.
pub fn dim_root(lambda: f64, dim: usize) -> f64 {
    match dim {
        1 => lambda,
        2 => lambda.sqrt(),
        3 => lambda.cbrt(),
        _ => lambda.powf(1.0 / dim as f64),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    /// Grid index `(j_1, ..., j_d)`; the cube is `∏[j_i s, (j_i + 1) s)`.
    pub index: Vec<i64>,
    /// `ν = λ ∫_Q κ`.
    pub intensity: f64,
}

#[derive(Debug, Clone)]
pub struct CubePartition {
    dim: usize,
    lambda: f64,
    rho: f64,
    side: f64,
    cubes: Vec<Cube>,
    lookup: HashMap<Vec<i64>, usize>,
}

impl CubePartition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `s_λ = λ^{-1/d} ρ_λ`.
    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    /// `V(λ)`.
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Position in `cubes()` of the cube with this grid index.
    pub fn position_of(&self, index: &[i64]) -> Option<usize> {
        self.lookup.get(index).copied()
    }

    /// Grid index of the half-open cube containing `x`.
    pub fn grid_index(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|v| (v / self.side).floor() as i64).collect()
    }
}

const MAX_CUBES: usize = 50_000_000;

/// Cubes of side `λ^{-1/d} ρ_λ` with positive `κ`-mass, in lexicographic
/// grid-index order.
pub fn build_cube_partition(lambda: f64, rho: f64, density: &Density) -> Result<CubePartition, ProcessError> {
    if !(lambda.is_finite() && lambda >= 1.0) {
        return Err(ProcessError::InvalidPartition(format!("λ = {lambda} must be ≥ 1")));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(ProcessError::InvalidPartition(format!("ρ = {rho} must be > 0")));
    }
    let dim = density.dim();
    let side = rho / dim_root(lambda, dim);
    let domain = density.domain();
    let mut first = Vec::with_capacity(dim);
    let mut extent = Vec::with_capacity(dim);
    let mut total: usize = 1;
    for axis in 0..dim {
        let a = (domain.lower()[axis] / side).floor() as i64;
        let b = (domain.upper()[axis] / side).ceil() as i64;
        let n = (b - a).max(1) as usize;
        first.push(a);
        extent.push(n);
        total = total.saturating_mul(n);
    }
    if total > MAX_CUBES {
        return Err(ProcessError::InvalidPartition(format!(
            "support needs {total} cubes of side {side}; refusing to enumerate more than {MAX_CUBES}"
        )));
    }
    let mut cubes = Vec::new();
    let mut lookup = HashMap::new();
    let mut cursor = vec![0usize; dim];
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    loop {
        let index: Vec<i64> = cursor.iter().zip(&first).map(|(c, f)| f + *c as i64).collect();
        for axis in 0..dim {
            lo[axis] = index[axis] as f64 * side;
            hi[axis] = (index[axis] + 1) as f64 * side;
        }
        let mass = density.mass_in_box(&lo, &hi);
        if mass > 0.0 {
            lookup.insert(index.clone(), cubes.len());
            cubes.push(Cube {
                index,
                intensity: lambda * mass,
            });
        }
        if !advance(&mut cursor, |axis| extent[axis]) {
            break;
        }
    }
    Ok(CubePartition {
        dim,
        lambda,
        rho,
        side,
        cubes,
        lookup,
    })
}

/// Cube grid index → indices of the points it contains (half-open boxes).
pub fn assign_points_to_cubes(
    config: &MarkedConfiguration,
    partition: &CubePartition,
) -> Result<BTreeMap<Vec<i64>, Vec<usize>>, ProcessError> {
    let mut out: BTreeMap<Vec<i64>, Vec<usize>> = BTreeMap::new();
    for (i, (pos, _)) in config.iter().enumerate() {
        let index = partition.grid_index(pos);
        if partition.position_of(&index).is_none() {
            return Err(ProcessError::OutsidePartition {
                index: i,
                coords: pos.to_vec(),
            });
        }
        out.entry(index).or_default().push(i);
    }
    Ok(out)
}
