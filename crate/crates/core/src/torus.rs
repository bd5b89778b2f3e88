//! Hyperbolic automorphisms of the d-torus: floating-point and exact dynamics,
//! and exact enumeration of periodic points.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{self, IntMatrix};

pub const DEFAULT_HYPERBOLICITY_TOL: f64 = 1e-9;

/// Outcome of validating an integer matrix as a hyperbolic toral automorphism.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicityReport {
    pub dim: usize,
    #[serde(serialize_with = "ser_bigint")]
    pub determinant: BigInt,
    /// Eigenvalue moduli, largest first.
    pub moduli: Vec<f64>,
    pub tol: f64,
}

fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Eigenvalue moduli of an integer matrix, largest first. Validation only.
pub fn eigenvalue_moduli(m: &IntMatrix) -> Vec<f64> {
    let d = m.dim();
    let flat: Vec<f64> = m.to_f64_rows().into_iter().flatten().collect();
    let mat = DMatrix::from_row_slice(d, d, &flat);
    let mut moduli: Vec<f64> = mat.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli
}

/// Accepts iff |det| = 1 and no eigenvalue modulus is within `tol` of 1.
pub fn check_hyperbolic(rows: &[Vec<i64>], tol: f64) -> Result<HyperbolicityReport> {
    let m = IntMatrix::from_rows(rows)?;
    let det = m.det();
    if det.abs() != BigInt::one() {
        return Err(Error::DeterminantNotUnit { det });
    }
    let moduli = eigenvalue_moduli(&m);
    if let Some(&bad) = moduli.iter().find(|&&r| (r - 1.0).abs() <= tol) {
        return Err(Error::NearUnitEigenvalue {
            modulus: bad,
            tol,
            moduli,
        });
    }
    Ok(HyperbolicityReport {
        dim: m.dim(),
        determinant: det,
        moduli,
        tol,
    })
}

/// The base map T: x ↦ A·x mod ℤ^d.
#[derive(Debug, Clone)]
pub struct ToralAutomorphism {
    matrix: IntMatrix,
    rows: Vec<Vec<i64>>,
    rows_f64: Vec<Vec<f64>>,
    report: HyperbolicityReport,
}

impl ToralAutomorphism {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        Self::with_tolerance(rows, DEFAULT_HYPERBOLICITY_TOL)
    }

    pub fn with_tolerance(rows: Vec<Vec<i64>>, tol: f64) -> Result<Self> {
        let report = check_hyperbolic(&rows, tol)?;
        let matrix = IntMatrix::from_rows(&rows)?;
        let rows_f64 = rows
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect();
        Ok(Self {
            matrix,
            rows,
            rows_f64,
            report,
        })
    }

    /// The map [[2,1],[1,1]].
    pub fn cat_map() -> Self {
        Self::new(vec![vec![2, 1], vec![1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn report(&self) -> &HyperbolicityReport {
        &self.report
    }

    /// max over eigenvalues of min(|μ|, 1/|μ|): the slowest contraction rate.
    pub fn contraction_rate(&self) -> f64 {
        self.report
            .moduli
            .iter()
            .map(|&r| r.min(1.0 / r))
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &TorusPoint) -> Result<TorusPoint> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &TorusPoint) -> TorusPoint {
        let mut coords = vec![0.0; self.dim()];
        self.step_into(&x.coords, &mut coords);
        TorusPoint { coords }
    }

    /// Writes (A·x) mod 1 into `out`; the one float kernel behind every orbit.
    #[inline]
    pub(crate) fn step_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows_f64) {
            let mut acc = 0.0;
            for (a, v) in row.iter().zip(x) {
                acc += a * v;
            }
            *o = wrap_unit(acc);
        }
    }

    pub fn apply_exact(&self, x: &RationalTorusPoint) -> Result<RationalTorusPoint> {
        check_dim(self.dim(), x.dim())?;
        Ok(self.apply_exact_unchecked(x))
    }

    pub(crate) fn apply_exact_unchecked(&self, x: &RationalTorusPoint) -> RationalTorusPoint {
        let numerators = self
            .matrix
            .mul_vec(&x.numerators)
            .into_iter()
            .map(|v| v.mod_floor(&x.denominator))
            .collect();
        RationalTorusPoint {
            numerators,
            denominator: x.denominator.clone(),
        }
    }

    /// det(A^n − I), exactly.
    pub fn periodic_determinant(&self, n: u32) -> BigInt {
        self.matrix.pow(n).minus_identity().det()
    }

    /// Number of fixed points of A^n, |det(A^n − I)|.
    pub fn fixed_point_count(&self, n: u32) -> Result<BigInt> {
        let det = self.periodic_determinant(n);
        if det.is_zero() {
            return Err(Error::NonHyperbolic { n });
        }
        Ok(det.abs())
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Reduces a real number into [0, 1).
pub fn wrap_unit(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point of ℝ^d/ℤ^d, stored by its representative in [0,1)^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    /// Wraps arbitrary real coordinates onto the torus.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("no coordinates".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(Self {
            coords: coords.into_iter().map(wrap_unit).collect(),
        })
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn translate(&self, offset: &[f64]) -> Self {
        Self {
            coords: self
                .coords
                .iter()
                .zip(offset)
                .map(|(c, o)| wrap_unit(c + o))
                .collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for TorusPoint {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TorusPoint> for Vec<f64> {
    fn from(p: TorusPoint) -> Self {
        p.coords
    }
}

/// Per-axis distance on the circle ℝ/ℤ.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Euclidean distance between closest lifts.
pub fn torus_distance(x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(torus_distance_unchecked(x.coords(), y.coords()))
}

#[inline]
pub(crate) fn torus_distance_unchecked(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = circle_distance(*a, *b);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Squared torus distance between two exact points, exactly.
pub fn torus_distance_sq_exact(x: &[BigRational], y: &[BigRational]) -> BigRational {
    let one = BigRational::one();
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = exact::frac(&(a - b));
            let d = if d > &one - &d { &one - &d } else { d };
            &d * &d
        })
        .fold(BigRational::zero(), |acc, v| acc + v)
}

/// A rational point num/den with a shared denominator.
#[derive(Debug, Clone, Eq)]
pub struct RationalTorusPoint {
    numerators: Vec<BigInt>,
    denominator: BigInt,
}

impl RationalTorusPoint {
    pub fn new(numerators: Vec<BigInt>, denominator: BigInt) -> Result<Self> {
        if !denominator.is_positive() {
            return Err(Error::InvalidPoint(format!(
                "denominator {denominator} must be positive"
            )));
        }
        if numerators.is_empty() {
            return Err(Error::InvalidPoint("no coordinates".into()));
        }
        if let Some(bad) = numerators
            .iter()
            .find(|n| n.is_negative() || *n >= &denominator)
        {
            return Err(Error::InvalidPoint(format!(
                "numerator {bad} outside [0, {denominator})"
            )));
        }
        Ok(Self {
            numerators,
            denominator,
        })
    }

    pub fn from_i64(numerators: &[i64], denominator: i64) -> Result<Self> {
        Self::new(
            numerators.iter().map(|&n| BigInt::from(n)).collect(),
            BigInt::from(denominator),
        )
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            numerators: vec![BigInt::zero(); dim],
            denominator: BigInt::one(),
        }
    }

    /// Reduces each rational into [0,1) and puts them over a common denominator.
    pub fn from_ratios(coords: &[BigRational]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("no coordinates".into()));
        }
        let reduced: Vec<BigRational> = coords.iter().map(exact::frac).collect();
        let den = reduced
            .iter()
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let numerators = reduced
            .iter()
            .map(|r| r.numer() * (&den / r.denom()))
            .collect();
        Self::new(numerators, den)
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.numerators
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn dim(&self) -> usize {
        self.numerators.len()
    }

    pub fn ratios(&self) -> Vec<BigRational> {
        self.numerators
            .iter()
            .map(|n| BigRational::new(n.clone(), self.denominator.clone()))
            .collect()
    }

    pub fn to_torus_point(&self) -> TorusPoint {
        let coords = self
            .numerators
            .iter()
            .map(|n| {
                let v = BigRational::new(n.clone(), self.denominator.clone())
                    .to_f64()
                    .unwrap_or(0.0);
                wrap_unit(v)
            })
            .collect();
        TorusPoint { coords }
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.numerators
            .iter()
            .map(|n| exact::format_rational(n, &self.denominator))
            .collect()
    }
}

impl PartialEq for RationalTorusPoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Ord for RationalTorusPoint {
    /// Lexicographic order on the rational coordinates.
    fn cmp(&self, other: &Self) -> Ordering {
        if self.denominator == other.denominator {
            return self.numerators.cmp(&other.numerators);
        }
        for (a, b) in self.numerators.iter().zip(&other.numerators) {
            let ord = (a * &other.denominator).cmp(&(b * &self.denominator));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.dim().cmp(&other.dim())
    }
}

impl std::hash::Hash for RationalTorusPoint {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ratios().hash(state);
    }
}

impl PartialOrd for RationalTorusPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RationalTorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

impl Serialize for RationalTorusPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalTorusPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        let ratios = strings
            .iter()
            .map(|s| exact::parse_ratio(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        if let Some(r) = ratios
            .iter()
            .find(|r| r.is_negative() || *r >= &BigRational::one())
        {
            return Err(serde::de::Error::custom(format!(
                "coordinate {} outside [0, 1)",
                exact::format_ratio(r)
            )));
        }
        Self::from_ratios(&ratios).map_err(serde::de::Error::custom)
    }
}

/// A periodic orbit, identified by its lexicographically smallest point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub base: RationalTorusPoint,
    /// Minimal period.
    pub period: u32,
}

impl PeriodicOrbit {
    /// All points of the orbit, starting at `base`.
    pub fn points(&self, a: &ToralAutomorphism) -> Vec<RationalTorusPoint> {
        let mut out = Vec::with_capacity(self.period as usize);
        let mut p = self.base.clone();
        for _ in 0..self.period {
            let next = a.apply_exact_unchecked(&p);
            out.push(p);
            p = next;
        }
        out
    }
}

/// All fixed points of A^n together with their orbit decomposition.
#[derive(Debug, Clone)]
pub struct PeriodicPointSet {
    pub n: u32,
    /// |det(A^n − I)|, the shared denominator and the point count.
    pub denominator: BigInt,
    pub points: Vec<RationalTorusPoint>,
    /// Sorted by (minimal period, base point).
    pub orbits: Vec<PeriodicOrbit>,
}

impl PeriodicPointSet {
    pub fn count(&self) -> usize {
        self.points.len()
    }
}

/// Every x with A^n x ≡ x (mod ℤ^d), solved exactly as x = (A^n − I)^{-1} m
/// over a complete residue system m of ℤ^d/(A^n − I)ℤ^d.
pub fn periodic_points(a: &ToralAutomorphism, n: u32) -> Result<PeriodicPointSet> {
    periodic_points_with_budget(a, n, u64::MAX)
}

pub fn periodic_points_with_budget(
    a: &ToralAutomorphism,
    n: u32,
    budget: u64,
) -> Result<PeriodicPointSet> {
    assert!(n >= 1, "period must be positive");
    let m = a.matrix().pow(n).minus_identity();
    let det = m.det();
    if det.is_zero() {
        return Err(Error::NonHyperbolic { n });
    }
    let denominator = det.abs();
    if denominator.to_u64().is_none_or(|c| c > budget) {
        return Err(Error::EnumerationBudget {
            n,
            count: denominator,
            budget,
        });
    }
    // M^{-1} = adj(M)/det, so x = sign(det)·adj(M)·m / |det| mod 1.
    let adj = if det.is_negative() {
        m.adjugate().neg()
    } else {
        m.adjugate()
    };
    let diag = m.lattice_diagonal();
    let d = a.dim();
    let count = denominator.to_usize().expect("budget-checked count");
    let mut points = Vec::with_capacity(count);
    let mut residue = vec![BigInt::zero(); d];
    'enumerate: loop {
        let numerators = adj
            .mul_vec(&residue)
            .into_iter()
            .map(|v| v.mod_floor(&denominator))
            .collect();
        points.push(RationalTorusPoint {
            numerators,
            denominator: denominator.clone(),
        });
        // Mixed-radix increment over the box 0 <= m_k < diag_k.
        for k in (0..d).rev() {
            residue[k] += 1;
            if residue[k] < diag[k] {
                continue 'enumerate;
            }
            residue[k] = BigInt::zero();
        }
        break;
    }
    debug_assert_eq!(points.len(), count);
    points.sort();
    let orbits = decompose_orbits(a, &points);
    Ok(PeriodicPointSet {
        n,
        denominator,
        points,
        orbits,
    })
}

/// Groups an A-invariant point set into orbits. `points` must be sorted so
/// that the first unvisited point of each orbit is its smallest.
fn decompose_orbits(a: &ToralAutomorphism, points: &[RationalTorusPoint]) -> Vec<PeriodicOrbit> {
    let index: HashMap<&[BigInt], usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.numerators.as_slice(), i))
        .collect();
    let mut visited = vec![false; points.len()];
    let mut orbits = Vec::new();
    for (i, start) in points.iter().enumerate() {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let mut period = 1u32;
        let mut p = a.apply_exact_unchecked(start);
        while p.numerators != start.numerators {
            let j = index[p.numerators.as_slice()];
            visited[j] = true;
            period += 1;
            p = a.apply_exact_unchecked(&p);
        }
        orbits.push(PeriodicOrbit {
            base: start.clone(),
            period,
        });
    }
    orbits.sort_by(|x, y| x.period.cmp(&y.period).then_with(|| x.base.cmp(&y.base)));
    orbits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> ToralAutomorphism {
        ToralAutomorphism::cat_map()
    }

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn hyperbolicity_checks() {
        let r = check_hyperbolic(&[vec![2, 1], vec![1, 1]], 1e-9).unwrap();
        let golden = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((r.moduli[0] - golden).abs() < 1e-12);
        assert!((r.moduli[1] - 1.0 / golden).abs() < 1e-12);

        assert!(matches!(
            check_hyperbolic(&[vec![1, 0], vec![0, 1]], 1e-9),
            Err(Error::NearUnitEigenvalue { .. })
        ));
        assert!(matches!(
            check_hyperbolic(&[vec![2, 0], vec![0, 2]], 1e-9),
            Err(Error::DeterminantNotUnit { .. })
        ));
        assert!(matches!(
            check_hyperbolic(&[vec![2, 1], vec![1]], 1e-9),
            Err(Error::NotSquare { .. })
        ));
        // Rotation by a quarter turn: |det| = 1 but eigenvalues ±i.
        assert!(matches!(
            check_hyperbolic(&[vec![0, -1], vec![1, 0]], 1e-9),
            Err(Error::NearUnitEigenvalue { .. })
        ));
    }

    #[test]
    fn apply_examples() {
        let a = cat();
        assert_eq!(a.apply(&pt(&[0.0, 0.0])).unwrap().coords(), &[0.0, 0.0]);
        assert_eq!(a.apply(&pt(&[0.5, 0.5])).unwrap().coords(), &[0.5, 0.0]);
        let y = a.apply(&pt(&[0.2, 0.1])).unwrap();
        assert!((y.coords()[0] - 0.5).abs() < 1e-15);
        assert!((y.coords()[1] - 0.3).abs() < 1e-15);
        assert!(matches!(
            a.apply(&pt(&[0.1, 0.2, 0.3])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_exact_examples() {
        let a = cat();
        let zero = RationalTorusPoint::from_i64(&[0, 0], 5).unwrap();
        assert_eq!(
            a.apply_exact(&zero).unwrap().numerators(),
            zero.numerators()
        );
        let x = RationalTorusPoint::from_i64(&[1, 2], 5).unwrap();
        let y = a.apply_exact(&x).unwrap();
        assert_eq!(y.numerators(), &[BigInt::from(4), BigInt::from(3)]);
        assert_eq!(y.denominator(), &BigInt::from(5));
        for p in periodic_points(&a, 2).unwrap().points {
            let back = a.apply_exact(&a.apply_exact(&p).unwrap()).unwrap();
            assert_eq!(back.numerators(), p.numerators());
        }
    }

    #[test]
    fn distance_examples() {
        let d = |a: &[f64], b: &[f64]| torus_distance(&pt(a), &pt(b)).unwrap();
        assert_eq!(d(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert!((d(&[0.0, 0.0], &[0.9, 0.0]) - 0.1).abs() < 1e-15);
        assert_eq!(d(&[0.25, 0.0], &[0.75, 0.0]), 0.5);
    }

    #[test]
    fn periodic_point_counts_small() {
        let a = cat();
        let p1 = periodic_points(&a, 1).unwrap();
        assert_eq!(p1.count(), 1);
        assert_eq!(p1.points[0].numerators(), &[BigInt::zero(), BigInt::zero()]);
        let p2 = periodic_points(&a, 2).unwrap();
        assert_eq!(p2.count(), 5);
        assert_eq!(p2.denominator, BigInt::from(5));
        // One fixed point plus two orbits of minimal period 2.
        let periods: Vec<u32> = p2.orbits.iter().map(|o| o.period).collect();
        assert_eq!(periods, vec![1, 2, 2]);
        assert_eq!(periodic_points(&a, 3).unwrap().count(), 16);
    }

    #[test]
    fn orbit_base_is_smallest_point() {
        let a = cat();
        let set = periodic_points(&a, 4).unwrap();
        for orbit in &set.orbits {
            let pts = orbit.points(&a);
            assert_eq!(pts.iter().min().unwrap(), &orbit.base);
            let back = a.apply_exact(pts.last().unwrap()).unwrap();
            assert_eq!(back, orbit.base);
        }
        let total: u32 = set.orbits.iter().map(|o| o.period).sum();
        assert_eq!(total as usize, set.count());
    }

    #[test]
    fn rational_point_serde() {
        let p = RationalTorusPoint::from_i64(&[1, 2], 5).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"["1/5","2/5"]"#);
        let q: RationalTorusPoint = serde_json::from_str(r#"["1/5","4/10"]"#).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<RationalTorusPoint>(r#"["6/5","0/1"]"#).is_err());
    }

    #[test]
    fn three_dimensional_map() {
        let a = ToralAutomorphism::new(vec![vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 0]]).unwrap();
        for n in 1..=6 {
            let set = periodic_points(&a, n).unwrap();
            assert_eq!(BigInt::from(set.count()), a.fixed_point_count(n).unwrap());
        }
    }
}
