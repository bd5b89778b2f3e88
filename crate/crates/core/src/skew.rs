//! The skew product T_f(x, g) = (A x, f(x) + g) on 𝕋^d × ℝ^ω, streamed
//! trajectories, and box-coverage diagnostics on a finite grid.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::sequence::SeqVector;
use crate::torus::{ToralAutomorphism, TorusPoint};

/// Largest number of boxes a grid may define.
pub const MAX_BOXES: u64 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewState {
    pub base: TorusPoint,
    pub fiber: SeqVector,
}

impl SkewState {
    pub fn at_zero(base: TorusPoint) -> Self {
        Self {
            base,
            fiber: SeqVector::zero(),
        }
    }
}

/// Streaming trajectory of T_f. The fiber update `fiber += f(x)` is the same
/// float sequence as `birkhoff_sum`, so the two agree bit for bit.
pub struct SkewOrbit<'a> {
    a: &'a ToralAutomorphism,
    f: &'a Cocycle,
    x: Vec<f64>,
    next: Vec<f64>,
    fiber: Vec<f64>,
    remaining: u64,
    started: bool,
}

impl<'a> SkewOrbit<'a> {
    pub fn new(
        a: &'a ToralAutomorphism,
        f: &'a Cocycle,
        start: &SkewState,
        steps: u64,
    ) -> Result<Self> {
        if a.dim() != f.dim() || start.base.dim() != f.dim() {
            return Err(Error::DimensionMismatch {
                expected: f.dim(),
                got: start.base.dim(),
            });
        }
        let len = f.len().max(start.fiber.support());
        Ok(Self {
            a,
            f,
            x: start.base.coords().to_vec(),
            next: vec![0.0; f.dim()],
            fiber: start.fiber.padded(len),
            remaining: steps,
            started: false,
        })
    }

    pub fn base(&self) -> &[f64] {
        &self.x
    }

    pub fn fiber(&self) -> &[f64] {
        &self.fiber
    }

    /// Advances one step; false once the step budget is spent.
    #[inline]
    pub fn advance(&mut self) -> bool {
        if self.remaining == 0 {
            return false;
        }
        self.f.accumulate(&self.x, &mut self.fiber);
        self.a.step_into(&self.x, &mut self.next);
        std::mem::swap(&mut self.x, &mut self.next);
        self.remaining -= 1;
        true
    }

    fn state(&self) -> SkewState {
        SkewState {
            base: TorusPoint::new(self.x.clone()).expect("orbit stays in [0,1)"),
            fiber: SeqVector::new(self.fiber.clone()),
        }
    }
}

/// Yields the start state and then one state per step.
impl Iterator for SkewOrbit<'_> {
    type Item = SkewState;

    fn next(&mut self) -> Option<SkewState> {
        if !self.started {
            self.started = true;
            return Some(self.state());
        }
        self.advance().then(|| self.state())
    }
}

pub fn skew_orbit<'a>(
    a: &'a ToralAutomorphism,
    f: &'a Cocycle,
    start: &SkewState,
    steps: u64,
) -> Result<SkewOrbit<'a>> {
    SkewOrbit::new(a, f, start, steps)
}

/// Partition of 𝕋^d × [−R, R]^n into boxes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub level: usize,
    pub half_width: f64,
    pub base_subdivisions: usize,
    pub fiber_subdivisions: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            level: 2,
            half_width: 5.0,
            base_subdivisions: 64,
            fiber_subdivisions: 32,
        }
    }
}

impl GridSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            errs.push(format!("half_width {} must be positive", self.half_width));
        }
        if self.base_subdivisions == 0 || self.fiber_subdivisions == 0 {
            errs.push("subdivisions must be positive".into());
        }
        if !errs.is_empty() {
            return Err(Error::InvalidGrid(errs.join("; ")));
        }
        match self.boxes_for(dim) {
            Some(n) if n <= MAX_BOXES => Ok(()),
            _ => Err(Error::InvalidGrid(format!(
                "{}^{dim} base × {}^{} fiber boxes exceeds {MAX_BOXES}",
                self.base_subdivisions, self.fiber_subdivisions, self.level
            ))),
        }
    }

    fn base_cells(&self, dim: usize) -> Option<u64> {
        (self.base_subdivisions as u64).checked_pow(dim as u32)
    }

    fn fiber_cells(&self) -> Option<u64> {
        (self.fiber_subdivisions as u64).checked_pow(self.level as u32)
    }

    fn boxes_for(&self, dim: usize) -> Option<u64> {
        self.base_cells(dim)?.checked_mul(self.fiber_cells()?)
    }

    #[inline]
    fn base_index(&self, x: &[f64]) -> usize {
        let m = self.base_subdivisions;
        x.iter()
            .fold(0, |acc, &v| acc * m + ((v * m as f64) as usize).min(m - 1))
    }

    /// None when some coordinate of the truncated fiber leaves [−R, R).
    #[inline]
    fn fiber_index(&self, fiber: &[f64]) -> Option<usize> {
        let m = self.fiber_subdivisions;
        let scale = m as f64 / (2.0 * self.half_width);
        let mut idx = 0;
        for k in 0..self.level {
            let v = fiber.get(k).copied().unwrap_or(0.0);
            let t = (v + self.half_width) * scale;
            if !(t >= 0.0 && t < m as f64) {
                return None;
            }
            idx = idx * m + t as usize;
        }
        Some(idx)
    }
}

/// First-hit times of every box plus an overflow bucket.
#[derive(Debug, Clone)]
pub struct Coverage {
    grid: GridSpec,
    fiber_cells: usize,
    first_hit: Vec<u32>,
    hit: u64,
    overflow_visits: u64,
    overflow_first_hit: Option<u64>,
    steps: u64,
    curve: Vec<(u64, f64)>,
    next_checkpoint: u64,
}

const UNHIT: u32 = u32::MAX;

impl Coverage {
    pub fn new(grid: GridSpec, dim: usize) -> Result<Self> {
        grid.validate(dim)?;
        let total = grid.boxes_for(dim).expect("validated") as usize;
        Ok(Self {
            grid,
            fiber_cells: grid.fiber_cells().expect("validated") as usize,
            first_hit: vec![UNHIT; total],
            hit: 0,
            overflow_visits: 0,
            overflow_first_hit: None,
            steps: 0,
            curve: Vec::new(),
            next_checkpoint: 1,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Marks the box of the state visited at time `t`.
    #[inline]
    pub fn record(&mut self, t: u64, base: &[f64], fiber: &[f64]) {
        match self.grid.fiber_index(fiber) {
            Some(fi) => {
                let idx = self.grid.base_index(base) * self.fiber_cells + fi;
                self.mark(idx, t);
            }
            None => {
                self.overflow_visits += 1;
                self.overflow_first_hit.get_or_insert(t);
            }
        }
        self.steps = self.steps.max(t);
        if t + 1 >= self.next_checkpoint {
            self.curve.push((t, self.fraction()));
            self.next_checkpoint = self.next_checkpoint.saturating_mul(2);
        }
    }

    #[inline]
    fn mark(&mut self, idx: usize, t: u64) {
        let slot = &mut self.first_hit[idx];
        if *slot == UNHIT {
            *slot = t.min(u64::from(UNHIT - 1)) as u32;
            self.hit += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.first_hit.len() as u64
    }

    pub fn hit(&self) -> u64 {
        self.hit
    }

    pub fn fraction(&self) -> f64 {
        self.hit as f64 / self.total() as f64
    }

    /// Distinct fiber cells visited, over all base cells.
    pub fn fiber_cells_hit(&self) -> usize {
        let mut seen = vec![false; self.fiber_cells];
        for (i, &t) in self.first_hit.iter().enumerate() {
            if t != UNHIT {
                seen[i % self.fiber_cells] = true;
            }
        }
        seen.iter().filter(|&&s| s).count()
    }

    /// Union of two coverages on the same grid; first hits take the minimum.
    pub fn merge(&mut self, other: &Coverage) -> Result<()> {
        if self.grid != other.grid || self.first_hit.len() != other.first_hit.len() {
            return Err(Error::InvalidGrid(
                "cannot merge coverages of different grids".into(),
            ));
        }
        for (a, &b) in self.first_hit.iter_mut().zip(&other.first_hit) {
            if b != UNHIT && (*a == UNHIT || b < *a) {
                if *a == UNHIT {
                    self.hit += 1;
                }
                *a = b;
            }
        }
        self.overflow_visits += other.overflow_visits;
        self.overflow_first_hit = match (self.overflow_first_hit, other.overflow_first_hit) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.steps = self.steps.max(other.steps);
        self.curve.clear();
        Ok(())
    }

    pub fn report(&self) -> CoverageReport {
        let times: Vec<u64> = self
            .first_hit
            .iter()
            .filter(|&&t| t != UNHIT)
            .map(|&t| u64::from(t))
            .collect();
        let mut sorted = times.clone();
        sorted.sort_unstable();
        let median = sorted.get(sorted.len() / 2).copied();
        CoverageReport {
            grid: self.grid,
            boxes_total: self.total(),
            boxes_hit: self.hit,
            fraction_hit: self.fraction(),
            fiber_cells_hit: self.fiber_cells_hit(),
            trajectory_length: self.steps,
            first_hit_max: sorted.last().copied(),
            first_hit_median: median,
            overflow_visits: self.overflow_visits,
            overflow_first_hit: self.overflow_first_hit,
            curve: self.curve.clone(),
        }
    }

    /// One row per hit box: base cell, fiber cell, first-hit time.
    pub fn write_first_hits_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["base_cell", "fiber_cell", "first_hit"])?;
        for (i, &t) in self.first_hit.iter().enumerate() {
            if t != UNHIT {
                w.write_record([
                    (i / self.fiber_cells).to_string(),
                    (i % self.fiber_cells).to_string(),
                    t.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub grid: GridSpec,
    pub boxes_total: u64,
    pub boxes_hit: u64,
    /// boxes_hit / boxes_total; the overflow bucket is not a box.
    pub fraction_hit: f64,
    pub fiber_cells_hit: usize,
    pub trajectory_length: u64,
    pub first_hit_max: Option<u64>,
    pub first_hit_median: Option<u64>,
    pub overflow_visits: u64,
    pub overflow_first_hit: Option<u64>,
    /// (steps, fraction) at t = 0, 1, 3, 7, … and the final step.
    pub curve: Vec<(u64, f64)>,
}

impl CoverageReport {
    pub fn write_curve_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["steps", "fraction_hit"])?;
        for (t, frac) in &self.curve {
            w.write_record([t.to_string(), frac.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `steps` steps from `start`, recording states 0..=steps.
pub fn coverage_from(
    a: &ToralAutomorphism,
    f: &Cocycle,
    start: &SkewState,
    steps: u64,
    grid: GridSpec,
) -> Result<Coverage> {
    let mut cov = Coverage::new(grid, f.dim())?;
    // Coordinates evolve independently, so only the first `level` matter.
    let g = f.truncate(grid.level);
    let mut orbit = SkewOrbit::new(a, &g, start, steps)?;
    let mut t = 0;
    cov.record(t, orbit.base(), orbit.fiber());
    while orbit.advance() {
        t += 1;
        cov.record(t, orbit.base(), orbit.fiber());
    }
    if cov.curve.last().is_none_or(|&(s, _)| s != t) {
        cov.curve.push((t, cov.fraction()));
    }
    Ok(cov)
}

/// Coverage of an already materialized trajectory.
pub fn coverage(trajectory: &[SkewState], grid: GridSpec) -> Result<CoverageReport> {
    let dim = trajectory.first().map_or(0, |s| s.base.dim());
    if trajectory.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut cov = Coverage::new(grid, dim)?;
    for (t, s) in trajectory.iter().enumerate() {
        cov.record(t as u64, s.base.coords(), s.fiber.values());
    }
    Ok(cov.report())
}

/// Kronecker sequence with the generalized golden ratio of dimension d,
/// shifted by a seeded offset.
pub fn low_discrepancy_points(dim: usize, count: usize, seed: u64) -> Vec<TorusPoint> {
    // φ_d is the positive root of x^{d+1} = x + 1.
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=dim).map(|k| phi.powi(-(k as i32)).fract()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (1..=count)
        .map(|i| {
            let c = alpha
                .iter()
                .zip(&shift)
                .map(|(a, s)| crate::torus::wrap_unit(s + i as f64 * a))
                .collect();
            TorusPoint::new(c).expect("wrapped")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    /// One grid per requested truncation level; its boxes are the targets.
    pub grids: Vec<GridSpec>,
    pub starts: usize,
    /// Steps each start gets while ranking candidates.
    pub pilot_steps: u64,
    /// Steps for the final run of the best candidate.
    pub budget: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelHits {
    pub level: usize,
    pub targets: u64,
    pub hit: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub candidate: TorusPoint,
    pub candidate_index: usize,
    /// Mean pilot fraction of every start, in start order.
    pub pilot_scores: Vec<f64>,
    pub per_level: Vec<LevelHits>,
    pub reports: Vec<CoverageReport>,
    /// False when some target box was missed within the budget.
    pub complete: bool,
}

/// Multi-start search for a base point x whose orbit from (x, 0) visits every
/// box of every requested grid.
pub fn transitive_point_search(
    a: &ToralAutomorphism,
    f: &Cocycle,
    spec: &SearchSpec,
) -> Result<SearchResult> {
    if spec.budget == 0 || spec.starts == 0 || spec.grids.is_empty() {
        return Err(Error::InvalidConfig(vec![
            "search needs a positive budget, at least one start and one grid".into(),
        ]));
    }
    for g in &spec.grids {
        g.validate(f.dim())?;
    }
    let starts = low_discrepancy_points(f.dim(), spec.starts, spec.seed);
    let score = |x: &TorusPoint, steps: u64| -> Result<Vec<Coverage>> {
        spec.grids
            .iter()
            .map(|g| coverage_from(a, f, &SkewState::at_zero(x.clone()), steps, *g))
            .collect()
    };
    let mut pilot_scores = Vec::with_capacity(starts.len());
    for x in &starts {
        let covs = score(x, spec.pilot_steps.min(spec.budget))?;
        pilot_scores.push(covs.iter().map(Coverage::fraction).sum::<f64>() / covs.len() as f64);
    }
    let best = pilot_scores
        .iter()
        .enumerate()
        .fold(0, |b, (i, &s)| if s > pilot_scores[b] { i } else { b });
    let covs = score(&starts[best], spec.budget)?;
    let per_level: Vec<LevelHits> = covs
        .iter()
        .map(|c| LevelHits {
            level: c.grid().level,
            targets: c.total(),
            hit: c.hit(),
        })
        .collect();
    let complete = per_level.iter().all(|l| l.hit == l.targets);
    Ok(SearchResult {
        candidate: starts[best].clone(),
        candidate_index: best,
        pilot_scores,
        per_level,
        reports: covs.iter().map(Coverage::report).collect(),
        complete,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakMixingReport {
    pub x: TorusPoint,
    pub y: TorusPoint,
    pub product: CoverageReport,
    pub single: CoverageReport,
    /// product fraction ≥ single fraction² − 0.1.
    pub soft_pass: bool,
}

/// Coverage of T_f × T_f from ((x, 0), (y, 0)) on the product of `grid` with
/// itself, with x and y the first two points of the seeded sequence.
pub fn weak_mixing_diagnostic(
    a: &ToralAutomorphism,
    f: &Cocycle,
    grid: GridSpec,
    budget: u64,
    seed: u64,
) -> Result<WeakMixingReport> {
    grid.validate(f.dim())?;
    let single_boxes = grid.boxes_for(f.dim()).expect("validated");
    if single_boxes
        .checked_mul(single_boxes)
        .is_none_or(|n| n > MAX_BOXES)
    {
        return Err(Error::InvalidGrid(format!(
            "product grid of {single_boxes}² boxes exceeds {MAX_BOXES}"
        )));
    }
    let pts = low_discrepancy_points(f.dim(), 2, seed);
    let (x, y) = (pts[0].clone(), pts[1].clone());
    let g = f.truncate(grid.level);
    // The product grid is the single grid on 𝕋^{2d} × ℝ^{2n}, realized by
    // laying the two factors side by side.
    let product_grid = GridSpec {
        level: 2 * grid.level,
        ..grid
    };
    let mut cov = Coverage::new(product_grid, 2 * f.dim())?;
    let mut o1 = SkewOrbit::new(a, &g, &SkewState::at_zero(x.clone()), budget)?;
    let mut o2 = SkewOrbit::new(a, &g, &SkewState::at_zero(y.clone()), budget)?;
    let mut base = vec![0.0; 2 * f.dim()];
    let mut fiber = vec![0.0; 2 * grid.level];
    let mut t = 0;
    loop {
        base[..f.dim()].copy_from_slice(o1.base());
        base[f.dim()..].copy_from_slice(o2.base());
        for k in 0..grid.level {
            fiber[k] = o1.fiber().get(k).copied().unwrap_or(0.0);
            fiber[grid.level + k] = o2.fiber().get(k).copied().unwrap_or(0.0);
        }
        cov.record(t, &base, &fiber);
        if !(o1.advance() & o2.advance()) {
            break;
        }
        t += 1;
    }
    let product = cov.report();
    let single = coverage_from(a, f, &SkewState::at_zero(x.clone()), budget, grid)?.report();
    let soft_pass = product.fraction_hit >= single.fraction_hit * single.fraction_hit - 0.1;
    Ok(WeakMixingReport {
        x,
        y,
        product,
        single,
        soft_pass,
    })
}
