//! Lipschitz cocycles f: 𝕋^d → ℝ^ω, their Birkhoff sums and periodic data,
//! cocycle distances with certified bounds, and truncation perturbations.

use std::f64::consts::PI;
use std::io::Write;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::sequence::{metric_terms, product_metric, SeqVector};
use crate::torus::{
    circle_distance, periodic_points_with_budget, torus_distance_sq_exact,
    torus_distance_unchecked, PeriodicOrbit, RationalTorusPoint, ToralAutomorphism, TorusPoint,
};

pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

/// One term a·cos(2π k·x) + b·sin(2π k·x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub frequency: Vec<i64>,
    pub cos: f64,
    pub sin: f64,
}

impl TrigTerm {
    fn amplitude(&self) -> f64 {
        self.cos.hypot(self.sin)
    }

    fn frequency_norm(&self) -> f64 {
        self.frequency
            .iter()
            .map(|&k| (k as f64) * (k as f64))
            .sum::<f64>()
            .sqrt()
    }
}

/// Tent of height `amplitude` and support radius `radius` around an exact center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BumpRepr", into = "BumpRepr")]
pub struct Bump {
    center: RationalTorusPoint,
    center_f64: TorusPoint,
    radius: f64,
    amplitude: f64,
}

#[derive(Serialize, Deserialize)]
struct BumpRepr {
    center: RationalTorusPoint,
    radius: f64,
    amplitude: f64,
}

impl TryFrom<BumpRepr> for Bump {
    type Error = Error;
    fn try_from(r: BumpRepr) -> Result<Self> {
        Bump::new(r.center, r.radius, r.amplitude)
    }
}

impl From<Bump> for BumpRepr {
    fn from(b: Bump) -> Self {
        BumpRepr {
            center: b.center,
            radius: b.radius,
            amplitude: b.amplitude,
        }
    }
}

impl Bump {
    pub fn new(center: RationalTorusPoint, radius: f64, amplitude: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 0.5) {
            return Err(Error::InvalidBump(format!(
                "radius {radius} outside (0, 1/2)"
            )));
        }
        if !amplitude.is_finite() {
            return Err(Error::InvalidBump(format!("amplitude {amplitude}")));
        }
        let center_f64 = center.to_torus_point();
        Ok(Self {
            center,
            center_f64,
            radius,
            amplitude,
        })
    }

    pub fn center(&self) -> &RationalTorusPoint {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn lipschitz(&self) -> f64 {
        self.amplitude.abs() / self.radius
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let c = self.center_f64.coords();
        let mut sq = 0.0;
        for (a, b) in x.iter().zip(c) {
            let d = circle_distance(*a, *b);
            if d >= self.radius {
                return 0.0;
            }
            sq += d * d;
        }
        let dist = sq.sqrt();
        if dist >= self.radius {
            0.0
        } else {
            self.amplitude * (1.0 - dist / self.radius)
        }
    }
}

/// Sum of tents. Tracks whether the supports are pairwise disjoint, which is
/// decided exactly from the rational centers and the exact values of the radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Bump>", into = "Vec<Bump>")]
pub struct BumpSum {
    bumps: Vec<Bump>,
    disjoint: bool,
}

impl TryFrom<Vec<Bump>> for BumpSum {
    type Error = Error;
    fn try_from(bumps: Vec<Bump>) -> Result<Self> {
        Ok(BumpSum::new(bumps))
    }
}

impl From<BumpSum> for Vec<Bump> {
    fn from(b: BumpSum) -> Self {
        b.bumps
    }
}

impl BumpSum {
    pub fn new(bumps: Vec<Bump>) -> Self {
        let disjoint = supports_disjoint(&bumps);
        Self { bumps, disjoint }
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    pub fn supports_disjoint(&self) -> bool {
        self.disjoint
    }
}

/// d(c_i, c_j) >= r_i + r_j for every pair, in exact arithmetic.
pub fn supports_disjoint(bumps: &[Bump]) -> bool {
    let centers: Vec<Vec<BigRational>> = bumps.iter().map(|b| b.center.ratios()).collect();
    let radii: Vec<BigRational> = bumps
        .iter()
        .map(|b| exact::rational_from_f64(b.radius))
        .collect();
    for i in 0..bumps.len() {
        for j in i + 1..bumps.len() {
            // Cheap float rejection first; exact check only near the boundary.
            let approx = torus_distance_unchecked(
                bumps[i].center_f64.coords(),
                bumps[j].center_f64.coords(),
            );
            let reach = bumps[i].radius + bumps[j].radius;
            if approx > reach * (1.0 + 1e-9) {
                continue;
            }
            let sum = &radii[i] + &radii[j];
            if torus_distance_sq_exact(&centers[i], &centers[j]) < &sum * &sum {
                return false;
            }
        }
    }
    true
}

/// One coordinate of a cocycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoordinateFunction {
    Constant { value: f64 },
    TrigPoly { terms: Vec<TrigTerm> },
    BumpSum { bumps: BumpSum },
}

impl CoordinateFunction {
    pub fn zero() -> Self {
        CoordinateFunction::Constant { value: 0.0 }
    }

    pub fn bumps(bumps: Vec<Bump>) -> Self {
        CoordinateFunction::BumpSum {
            bumps: BumpSum::new(bumps),
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            CoordinateFunction::Constant { value } => *value,
            CoordinateFunction::TrigPoly { terms } => terms
                .iter()
                .map(|t| {
                    let phase: f64 = t
                        .frequency
                        .iter()
                        .zip(x)
                        .map(|(&k, &xi)| k as f64 * xi)
                        .sum();
                    let (s, c) = (2.0 * PI * phase).sin_cos();
                    t.cos * c + t.sin * s
                })
                .sum(),
            CoordinateFunction::BumpSum { bumps } => bumps.bumps.iter().map(|b| b.eval(x)).sum(),
        }
    }

    /// Lipschitz constant with respect to the flat torus distance.
    pub fn lipschitz(&self) -> f64 {
        match self {
            CoordinateFunction::Constant { .. } => 0.0,
            CoordinateFunction::TrigPoly { terms } => terms
                .iter()
                .map(|t| 2.0 * PI * t.frequency_norm() * t.amplitude())
                .sum(),
            CoordinateFunction::BumpSum { bumps } => {
                let each = bumps.bumps.iter().map(Bump::lipschitz);
                if bumps.disjoint {
                    each.fold(0.0, f64::max)
                } else {
                    each.sum()
                }
            }
        }
    }

    /// Upper bound on sup |g|.
    pub fn sup_bound(&self) -> f64 {
        match self {
            CoordinateFunction::Constant { value } => value.abs(),
            CoordinateFunction::TrigPoly { terms } => terms.iter().map(TrigTerm::amplitude).sum(),
            CoordinateFunction::BumpSum { bumps } => {
                let each = bumps.bumps.iter().map(|b| b.amplitude.abs());
                if bumps.disjoint {
                    each.fold(0.0, f64::max)
                } else {
                    each.sum()
                }
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        match self {
            CoordinateFunction::Constant { value } => *value == 0.0,
            CoordinateFunction::TrigPoly { terms } => {
                terms.iter().all(|t| t.cos == 0.0 && t.sin == 0.0)
            }
            CoordinateFunction::BumpSum { bumps } => bumps.bumps.iter().all(|b| b.amplitude == 0.0),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        let bad = match self {
            CoordinateFunction::Constant { .. } => None,
            CoordinateFunction::TrigPoly { terms } => {
                terms.iter().map(|t| t.frequency.len()).find(|&l| l != dim)
            }
            CoordinateFunction::BumpSum { bumps } => bumps
                .bumps
                .iter()
                .map(|b| b.center.dim())
                .find(|&l| l != dim),
        };
        match bad {
            Some(got) => Err(Error::DimensionMismatch { expected: dim, got }),
            None => Ok(()),
        }
    }
}

/// A cocycle f = (f_1, f_2, …, f_m, 0, 0, …) on 𝕋^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CocycleRepr", into = "CocycleRepr")]
pub struct Cocycle {
    dim: usize,
    holder_exponent: f64,
    coordinates: Vec<CoordinateFunction>,
}

#[derive(Serialize, Deserialize)]
struct CocycleRepr {
    base_dim: usize,
    holder_exponent: f64,
    coordinates: Vec<CoordinateFunction>,
}

impl TryFrom<CocycleRepr> for Cocycle {
    type Error = Error;
    fn try_from(r: CocycleRepr) -> Result<Self> {
        Cocycle::new(r.base_dim, r.coordinates, r.holder_exponent)
    }
}

impl From<Cocycle> for CocycleRepr {
    fn from(c: Cocycle) -> Self {
        CocycleRepr {
            base_dim: c.dim,
            holder_exponent: c.holder_exponent,
            coordinates: c.coordinates,
        }
    }
}

impl Cocycle {
    pub fn new(
        dim: usize,
        coordinates: Vec<CoordinateFunction>,
        holder_exponent: f64,
    ) -> Result<Self> {
        if !(holder_exponent > 0.0 && holder_exponent <= 1.0) {
            return Err(Error::HolderExponent(holder_exponent));
        }
        for c in &coordinates {
            c.check_dim(dim)?;
        }
        Ok(Self {
            dim,
            holder_exponent,
            coordinates,
        })
    }

    /// Lipschitz cocycle (exponent 1).
    pub fn lipschitz(dim: usize, coordinates: Vec<CoordinateFunction>) -> Result<Self> {
        Self::new(dim, coordinates, 1.0)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            holder_exponent: 1.0,
            coordinates: Vec::new(),
        }
    }

    pub fn constant(dim: usize, value: &SeqVector) -> Self {
        let coordinates = value
            .values()
            .iter()
            .map(|&v| CoordinateFunction::Constant { value: v })
            .collect();
        Self {
            dim,
            holder_exponent: 1.0,
            coordinates,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder_exponent
    }

    pub fn coordinates(&self) -> &[CoordinateFunction] {
        &self.coordinates
    }

    /// Number of coordinate functions carried.
    pub fn len(&self) -> usize {
        self.coordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coordinates.is_empty()
    }

    /// Per-coordinate Lipschitz constants L_1, L_2, ….
    pub fn lipschitz_constants(&self) -> Vec<f64> {
        self.coordinates.iter().map(|c| c.lipschitz()).collect()
    }

    /// Lipschitz constant of f as a map into (ℝ^m, Euclidean norm): sqrt(Σ L_k²).
    pub fn euclidean_lipschitz(&self) -> f64 {
        self.lipschitz_constants()
            .iter()
            .map(|l| l * l)
            .sum::<f64>()
            .sqrt()
    }

    /// Σ_k 2^{-k} L_k: Lipschitz constant into (ℝ^ω, product metric).
    pub fn product_lipschitz(&self) -> f64 {
        self.lipschitz_constants()
            .iter()
            .enumerate()
            .map(|(i, l)| 0.5f64.powi(i as i32 + 1) * l)
            .sum()
    }

    pub fn evaluate(&self, x: &TorusPoint) -> Result<SeqVector> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(SeqVector::new(self.values_at(x.coords())))
    }

    pub(crate) fn values_at(&self, x: &[f64]) -> Vec<f64> {
        self.coordinates.iter().map(|c| c.eval(x)).collect()
    }

    #[inline]
    pub(crate) fn accumulate(&self, x: &[f64], acc: &mut [f64]) {
        for (a, c) in acc.iter_mut().zip(&self.coordinates) {
            *a += c.eval(x);
        }
    }

    /// π_n∘f: coordinates beyond n replaced by the zero function.
    pub fn truncate(&self, n: usize) -> Self {
        Self {
            dim: self.dim,
            holder_exponent: self.holder_exponent,
            coordinates: self.coordinates.iter().take(n).cloned().collect(),
        }
    }

    /// Coordinate k (1-based), the zero function beyond the carried list.
    pub fn coordinate(&self, k: usize) -> CoordinateFunction {
        self.coordinates
            .get(k - 1)
            .cloned()
            .unwrap_or_else(CoordinateFunction::zero)
    }
}

/// π_n∘f.
pub fn truncation_perturbation(f: &Cocycle, n: usize) -> Cocycle {
    f.truncate(n)
}

/// Σ_{i<k} f(A^i x). The accumulation order is shared with the skew-product
/// simulation so that both agree bit for bit.
pub fn birkhoff_sum(
    f: &Cocycle,
    a: &ToralAutomorphism,
    x: &TorusPoint,
    k: u64,
) -> Result<SeqVector> {
    if x.dim() != f.dim() || a.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.dim(),
        });
    }
    let mut acc = vec![0.0; f.len()];
    let mut p = x.coords().to_vec();
    let mut next = p.clone();
    for _ in 0..k {
        f.accumulate(&p, &mut acc);
        a.step_into(&p, &mut next);
        std::mem::swap(&mut p, &mut next);
    }
    Ok(SeqVector::new(acc))
}

/// Birkhoff sum along an exact periodic orbit, starting at `start`.
pub fn orbit_weight(
    f: &Cocycle,
    a: &ToralAutomorphism,
    start: &RationalTorusPoint,
    period: u32,
) -> SeqVector {
    let mut acc = vec![0.0; f.len()];
    let mut p = start.clone();
    for _ in 0..period {
        f.accumulate(p.to_torus_point().coords(), &mut acc);
        p = a.apply_exact_unchecked(&p);
    }
    SeqVector::new(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicEntry {
    pub orbit: PeriodicOrbit,
    pub weight: SeqVector,
}

/// The periodic data P_f, one entry per periodic orbit of minimal period ≤ n_max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicData {
    pub entries: Vec<PeriodicEntry>,
}

impl PeriodicData {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Weights projected to ℝ^level.
    pub fn weights_at_level(&self, level: usize) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|e| e.weight.padded(level))
            .collect()
    }

    /// Columns: orbit id, period, base point coordinates, weight coordinates.
    pub fn write_csv<W: Write>(&self, out: W, dim: usize) -> Result<()> {
        let level = self
            .entries
            .iter()
            .map(|e| e.weight.support())
            .max()
            .unwrap_or(0);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["orbit".to_string(), "period".to_string()];
        header.extend((1..=dim).map(|i| format!("x{i}")));
        header.extend((1..=level).map(|k| format!("w{k}")));
        w.write_record(&header)?;
        for (id, e) in self.entries.iter().enumerate() {
            let mut rec = vec![id.to_string(), e.orbit.period.to_string()];
            rec.extend(e.orbit.base.to_strings());
            rec.extend(e.weight.padded(level).iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Every periodic orbit of minimal period ≤ n_max, sorted by (period, base).
pub fn periodic_orbits(
    a: &ToralAutomorphism,
    n_max: u32,
    budget: u64,
) -> Result<Vec<PeriodicOrbit>> {
    let mut orbits = Vec::new();
    for n in 1..=n_max {
        let set = periodic_points_with_budget(a, n, budget)?;
        orbits.extend(set.orbits.into_iter().filter(|o| o.period == n));
    }
    Ok(orbits)
}

pub fn periodic_data(
    f: &Cocycle,
    a: &ToralAutomorphism,
    n_max: u32,
    budget: u64,
) -> Result<PeriodicData> {
    if a.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: a.dim(),
        });
    }
    let entries = periodic_orbits(a, n_max, budget)?
        .into_iter()
        .map(|orbit| {
            let weight = orbit_weight(f, a, &orbit.base, orbit.period);
            PeriodicEntry { orbit, weight }
        })
        .collect();
    Ok(PeriodicData { entries })
}

/// A sampled lower bound and, when derivable, a certified upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceBounds {
    pub sampled_lower: f64,
    pub certified_upper: Option<f64>,
}

impl DistanceBounds {
    pub fn consistent(&self) -> bool {
        self.certified_upper.is_none_or(|u| self.sampled_lower <= u)
    }
}

/// Regular grid of `per_axis`^d points i/per_axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub per_axis: usize,
}

impl SampleGrid {
    pub fn points(&self, dim: usize) -> Vec<TorusPoint> {
        let m = self.per_axis;
        let total = m.pow(dim as u32);
        (0..total)
            .map(|mut idx| {
                let mut c = vec![0.0; dim];
                for slot in c.iter_mut().rev() {
                    *slot = (idx % m) as f64 / m as f64;
                    idx /= m;
                }
                TorusPoint::new(c).expect("grid point")
            })
            .collect()
    }
}

/// Pairs for sampling Hölder quotients: all pairs of grid points, axis
/// offsets of each grid point, and pairs straddling every bump slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub grid: SampleGrid,
    pub offsets: Vec<f64>,
    pub bump_features: bool,
}

impl Default for PairSample {
    fn default() -> Self {
        Self {
            grid: SampleGrid { per_axis: 8 },
            offsets: vec![1e-3, 1e-2, 5e-2],
            bump_features: true,
        }
    }
}

impl PairSample {
    fn pairs(&self, f: &Cocycle, g: &Cocycle) -> Vec<(TorusPoint, TorusPoint)> {
        let dim = f.dim();
        let pts = self.grid.points(dim);
        let mut pairs = Vec::new();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                pairs.push((pts[i].clone(), pts[j].clone()));
            }
            for &h in &self.offsets {
                for axis in 0..dim {
                    let mut off = vec![0.0; dim];
                    off[axis] = h;
                    pairs.push((pts[i].clone(), pts[i].translate(&off)));
                }
            }
        }
        if self.bump_features {
            for c in f.coordinates().iter().chain(g.coordinates()) {
                if let CoordinateFunction::BumpSum { bumps } = c {
                    for b in bumps.bumps() {
                        let mut off = vec![0.0; dim];
                        off[0] = 0.5 * b.radius();
                        pairs.push((b.center_f64.clone(), b.center_f64.translate(&off)));
                    }
                }
            }
        }
        pairs.retain(|(x, y)| torus_distance_unchecked(x.coords(), y.coords()) > 0.0);
        pairs
    }
}

/// Per-coordinate bounds (sup |h_k|, Lip h_k) for h = f − g.
fn difference_bounds(f: &Cocycle, g: &Cocycle) -> Vec<(f64, f64)> {
    let m = f.len().max(g.len());
    (1..=m)
        .map(|k| {
            let (fk, gk) = (f.coordinate(k), g.coordinate(k));
            if fk == gk {
                (0.0, 0.0)
            } else {
                (
                    fk.sup_bound() + gk.sup_bound(),
                    fk.lipschitz() + gk.lipschitz(),
                )
            }
        })
        .collect()
}

fn check_same_dim(f: &Cocycle, g: &Cocycle) -> Result<()> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: g.dim(),
        });
    }
    Ok(())
}

/// sup_x d(f(x), g(x)): sampled on the grid, certified from coordinate bounds.
pub fn sup_distance(f: &Cocycle, g: &Cocycle, sample: &SampleGrid) -> Result<DistanceBounds> {
    check_same_dim(f, g)?;
    let pts = sample.points(f.dim());
    if pts.is_empty() {
        return Err(Error::EmptySample);
    }
    let sampled_lower = pts
        .iter()
        .map(|x| {
            product_metric(
                &SeqVector::new(f.values_at(x.coords())),
                &SeqVector::new(g.values_at(x.coords())),
            )
        })
        .fold(0.0, f64::max);
    let bounds = difference_bounds(f, g);
    let certified_upper = metric_terms(bounds.len(), |i| bounds[i].0);
    Ok(DistanceBounds {
        sampled_lower,
        certified_upper: Some(certified_upper),
    })
}

/// d_α(f, g) = sup_{x≠y} d(h(x), h(y)) / d(x, y)^α with h = f − g.
pub fn holder_distance(
    f: &Cocycle,
    g: &Cocycle,
    alpha: f64,
    sample: &PairSample,
) -> Result<DistanceBounds> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::HolderExponent(alpha));
    }
    check_same_dim(f, g)?;
    let pairs = sample.pairs(f, g);
    if pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    let diff = |x: &TorusPoint| {
        let fx = SeqVector::new(f.values_at(x.coords()));
        let gx = SeqVector::new(g.values_at(x.coords()));
        &fx - &gx
    };
    let sampled_lower = pairs
        .iter()
        .map(|(x, y)| {
            let dxy = torus_distance_unchecked(x.coords(), y.coords());
            product_metric(&diff(x), &diff(y)) / dxy.powf(alpha)
        })
        .fold(0.0, f64::max);
    // Each metric term is at most 2^{-k}·L_k·d(x,y), and d(x,y)^{1-α} <= diam^{1-α}.
    let diam = (f.dim() as f64).sqrt() / 2.0;
    let scale = diam.powf(1.0 - alpha);
    let certified_upper: f64 = difference_bounds(f, g)
        .iter()
        .enumerate()
        .map(|(i, &(_, lip))| 0.5f64.powi(i as i32 + 1) * lip * scale)
        .sum();
    Ok(DistanceBounds {
        sampled_lower,
        certified_upper: Some(certified_upper),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cat() -> ToralAutomorphism {
        ToralAutomorphism::cat_map()
    }

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c.to_vec()).unwrap()
    }

    fn trig_cocycle() -> Cocycle {
        Cocycle::lipschitz(
            2,
            vec![
                CoordinateFunction::TrigPoly {
                    terms: vec![TrigTerm {
                        frequency: vec![1, 0],
                        cos: 0.1,
                        sin: 0.05,
                    }],
                },
                CoordinateFunction::TrigPoly {
                    terms: vec![TrigTerm {
                        frequency: vec![1, -2],
                        cos: 0.0,
                        sin: 0.02,
                    }],
                },
                CoordinateFunction::Constant { value: 0.25 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let c = SeqVector::new(vec![1.5, -2.0]);
        let f = Cocycle::constant(2, &c);
        assert_eq!(f.evaluate(&pt(&[0.3, 0.7])).unwrap(), c);

        let center = RationalTorusPoint::from_i64(&[1, 2], 5).unwrap();
        let bump = Bump::new(center, 0.1, 0.7).unwrap();
        let f = Cocycle::lipschitz(2, vec![CoordinateFunction::bumps(vec![bump])]).unwrap();
        assert_eq!(f.evaluate(&pt(&[0.2, 0.4])).unwrap().get(1), 0.7);
        assert_eq!(f.evaluate(&pt(&[0.3125, 0.4])).unwrap().get(1), 0.0);
        assert_eq!(f.evaluate(&pt(&[0.2, 0.55])).unwrap().get(1), 0.0);
        assert!(f.evaluate(&pt(&[0.2, 0.4, 0.1])).is_err());
    }

    #[test]
    fn bump_validation() {
        let c = RationalTorusPoint::origin(2);
        assert!(Bump::new(c.clone(), 0.5, 1.0).is_err());
        assert!(Bump::new(c.clone(), 0.0, 1.0).is_err());
        assert!(Bump::new(c, 0.2, f64::NAN).is_err());
    }

    #[test]
    fn birkhoff_examples() {
        let a = cat();
        let f = trig_cocycle();
        let x = pt(&[0.3, 0.1]);
        assert!(birkhoff_sum(&f, &a, &x, 0).unwrap().is_zero());

        let c = SeqVector::new(vec![1.0, -0.5]);
        let fc = Cocycle::constant(2, &c);
        assert_eq!(birkhoff_sum(&fc, &a, &x, 3).unwrap(), c.scale(3.0));

        let origin = TorusPoint::origin(2);
        let s = birkhoff_sum(&f, &a, &origin, 4).unwrap();
        let expected = f.evaluate(&origin).unwrap().scale(4.0);
        assert!(product_metric(&s, &expected) < 1e-15);
    }

    #[test]
    fn cocycle_identity() {
        let a = cat();
        let f = trig_cocycle();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x = pt(&[rng.gen(), rng.gen()]);
            let k = rng.gen_range(0..40u64);
            let m = rng.gen_range(0..40u64);
            let whole = birkhoff_sum(&f, &a, &x, k + m).unwrap();
            let mut y = x.clone();
            for _ in 0..m {
                y = a.apply(&y).unwrap();
            }
            let split =
                &birkhoff_sum(&f, &a, &y, k).unwrap() + &birkhoff_sum(&f, &a, &x, m).unwrap();
            for i in 1..=3 {
                assert!((whole.get(i) - split.get(i)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn periodic_data_examples() {
        let a = cat();
        let f = trig_cocycle();
        let pd = periodic_data(&f, &a, 1, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(pd.len(), 1);
        assert_eq!(
            pd.entries[0].weight,
            f.evaluate(&TorusPoint::origin(2)).unwrap()
        );

        let zero = periodic_data(&Cocycle::zero(2), &a, 3, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert!(zero.entries.iter().all(|e| e.weight.is_zero()));

        let c = SeqVector::new(vec![0.75, -1.0]);
        let pd =
            periodic_data(&Cocycle::constant(2, &c), &a, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let got: Vec<(u32, SeqVector)> = pd
            .entries
            .iter()
            .map(|e| (e.orbit.period, e.weight.clone()))
            .collect();
        assert_eq!(
            got,
            vec![(1, c.clone()), (2, c.scale(2.0)), (2, c.scale(2.0))]
        );
    }

    #[test]
    fn periodic_weights_are_orbit_invariant() {
        let a = cat();
        let f = trig_cocycle();
        for orbit in periodic_orbits(&a, 5, DEFAULT_ENUMERATION_BUDGET).unwrap() {
            let w0 = orbit_weight(&f, &a, &orbit.base, orbit.period);
            for p in orbit.points(&a) {
                let w = orbit_weight(&f, &a, &p, orbit.period);
                for k in 1..=3 {
                    assert!((w.get(k) - w0.get(k)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn enumeration_budget_reports_offender() {
        let err = periodic_data(&trig_cocycle(), &cat(), 6, 100).unwrap_err();
        match err {
            Error::EnumerationBudget { n, count, .. } => {
                assert_eq!(n, 5);
                assert_eq!(count, 121.into());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lipschitz_bound_holds_on_random_pairs() {
        let bumps = vec![
            Bump::new(RationalTorusPoint::from_i64(&[1, 2], 5).unwrap(), 0.1, 0.3).unwrap(),
            Bump::new(
                RationalTorusPoint::from_i64(&[4, 3], 5).unwrap(),
                0.15,
                -0.2,
            )
            .unwrap(),
        ];
        let mut coords = trig_cocycle().coordinates().to_vec();
        coords.push(CoordinateFunction::bumps(bumps));
        let f = Cocycle::lipschitz(2, coords).unwrap();
        let l = f.product_lipschitz();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let x = pt(&[rng.gen(), rng.gen()]);
            let y = if rng.gen_bool(0.5) {
                x.translate(&[rng.gen_range(-0.01..0.01), rng.gen_range(-0.01..0.01)])
            } else {
                pt(&[rng.gen(), rng.gen()])
            };
            let d = torus_distance_unchecked(x.coords(), y.coords());
            let lhs = product_metric(&f.evaluate(&x).unwrap(), &f.evaluate(&y).unwrap());
            assert!(lhs <= l * d + 1e-15, "{lhs} > {l} * {d}");
        }
    }

    #[test]
    fn disjointness_is_exact() {
        // Centers 2/5 apart on one axis; radii summing to exactly 0.4 touch.
        let c1 = RationalTorusPoint::from_i64(&[0, 0], 5).unwrap();
        let c2 = RationalTorusPoint::from_i64(&[2, 0], 5).unwrap();
        let touching = vec![
            Bump::new(c1.clone(), 0.25, 1.0).unwrap(),
            Bump::new(c2.clone(), 0.15, 1.0).unwrap(),
        ];
        // 0.25 + 0.15 as exact binary values exceeds 2/5 by rounding of 0.15;
        // decided exactly either way, never by float tolerance.
        let exact_sum = exact::rational_from_f64(0.25) + exact::rational_from_f64(0.15);
        let expect = exact_sum <= BigRational::new(2.into(), 5.into());
        assert_eq!(supports_disjoint(&touching), expect);
        let apart = vec![
            Bump::new(c1, 0.1, 1.0).unwrap(),
            Bump::new(c2, 0.1, 1.0).unwrap(),
        ];
        assert!(supports_disjoint(&apart));
    }

    #[test]
    fn distance_examples() {
        let f = trig_cocycle();
        let grid = SampleGrid { per_axis: 6 };
        let same = sup_distance(&f, &f, &grid).unwrap();
        assert_eq!(same.sampled_lower, 0.0);
        assert_eq!(same.certified_upper, Some(0.0));
        let hd = holder_distance(&f, &f, 1.0, &PairSample::default()).unwrap();
        assert_eq!(hd.sampled_lower, 0.0);
        assert_eq!(hd.certified_upper, Some(0.0));

        let one = Cocycle::constant(2, &SeqVector::new(vec![1.0]));
        let d = sup_distance(&one, &Cocycle::zero(2), &grid).unwrap();
        assert_eq!(d.sampled_lower, 0.25);
        assert!(d.consistent());

        assert!(matches!(
            holder_distance(&f, &f, 0.0, &PairSample::default()),
            Err(Error::HolderExponent(_))
        ));
        assert!(matches!(
            sup_distance(&f, &f, &SampleGrid { per_axis: 0 }),
            Err(Error::EmptySample)
        ));
    }

    /// Brute-force oracle: a dense pair grid for a single trig coordinate
    /// never exceeds the analytic bound 2^{-1}·L.
    #[test]
    fn holder_lower_bound_respects_lipschitz_oracle() {
        let f = Cocycle::lipschitz(
            2,
            vec![CoordinateFunction::TrigPoly {
                terms: vec![TrigTerm {
                    frequency: vec![0, 1],
                    cos: 0.02,
                    sin: 0.0,
                }],
            }],
        )
        .unwrap();
        let l = f.lipschitz_constants()[0];
        assert!((l - 2.0 * PI * 0.02).abs() < 1e-15);
        let sample = PairSample {
            grid: SampleGrid { per_axis: 16 },
            offsets: vec![1e-4, 1e-3],
            bump_features: false,
        };
        let hd = holder_distance(&f, &Cocycle::zero(2), 1.0, &sample).unwrap();
        let upper = hd.certified_upper.unwrap();
        assert!((upper - 0.5 * l).abs() < 1e-15);
        assert!(hd.sampled_lower <= upper);
        // Steepest slope at y = 1/4 is reached by the small offsets to within a few percent.
        assert!(hd.sampled_lower > 0.9 * 0.5 * l / (1.0 + 0.04));
    }

    #[test]
    fn truncation_perturbation_examples() {
        let f = trig_cocycle();
        assert_eq!(truncation_perturbation(&f, 3), f);
        assert_eq!(truncation_perturbation(&f, 10), f);
        assert!(truncation_perturbation(&f, 0).is_empty());
        let g = truncation_perturbation(&f, 1);
        let d = sup_distance(&f, &g, &SampleGrid { per_axis: 5 }).unwrap();
        assert!(d.certified_upper.unwrap() <= 0.5);
        assert!(d.consistent());
    }

    #[test]
    fn cocycle_json_roundtrip() {
        let bumps =
            vec![Bump::new(RationalTorusPoint::from_i64(&[1, 2], 5).unwrap(), 0.1, -0.3).unwrap()];
        let mut coords = trig_cocycle().coordinates().to_vec();
        coords.push(CoordinateFunction::bumps(bumps));
        let f = Cocycle::lipschitz(2, coords).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains(r#""center":["1/5","2/5"]"#));
        let back: Cocycle = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let bad = s.replace(r#""base_dim":2"#, r#""base_dim":3"#);
        assert!(serde_json::from_str::<Cocycle>(&bad).is_err());
    }
}
