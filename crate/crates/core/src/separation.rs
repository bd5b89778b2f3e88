//! Exact decision of whether a finite set of weights lies on one side of a
//! hyperplane through the origin.
//!
//! The decision runs in four steps:
//!
//! 1. Exact rank. Points spanning a proper subspace are separable by any
//!    functional vanishing on the span.
//! 2. Orthant cover. One point strictly inside every orthant forces
//!    inseparability.
//! 3. Margin LP: maximize t subject to ⟨v, p_i⟩ ≥ t and −1 ≤ v_j ≤ 1. It is
//!    solved through its dual, min ‖Σ y_i p_i‖₁ over convex weights y, whose
//!    n + 1 rows keep the tableau small; v is read off the multipliers. A
//!    positive optimum gives a strict separator.
//! 4. Zero margin means 0 ∈ conv(P). With full rank, a nonzero v with all
//!    ⟨v, p_i⟩ ≥ 0 exists iff no strictly positive y has Σ y_i p_i = 0
//!    (Stiemke's alternative). A feasibility LP finds y, or its Farkas vector
//!    is the separator.
//!
//! Every certificate is re-verified in exact arithmetic before it is returned.

use std::collections::BTreeMap;

use log::debug;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::lp::{self, LpOutcome, StandardLp};
use crate::sequence::LinearFunctional;

type Q = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Separable,
    Inseparable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Nonzero v with ⟨v, p⟩ ≥ margin ≥ 0 for every point.
    Functional {
        #[serde(with = "ratio_strings")]
        coefficients: Vec<Q>,
        #[serde(with = "ratio_string")]
        margin: Q,
    },
    /// Sign pattern (e.g. "+-") to the index of a point strictly inside that orthant.
    OrthantCover { cover: BTreeMap<String, usize> },
    /// Full rank and Σ y_i p_i = 0 with every y_i > 0.
    PositiveCombination {
        rank: usize,
        #[serde(with = "ratio_strings")]
        weights: Vec<Q>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub verdict: Verdict,
    pub dim: usize,
    pub points: usize,
    pub witness: Witness,
}

impl SeparationCertificate {
    /// Exact re-check of the witness against `points`.
    pub fn verify(&self, points: &[Vec<Q>]) -> bool {
        if points.len() != self.points || points.iter().any(|p| p.len() != self.dim) {
            return false;
        }
        match (&self.verdict, &self.witness) {
            (
                Verdict::Separable,
                Witness::Functional {
                    coefficients,
                    margin,
                },
            ) => {
                verify_functional(coefficients, points)
                    && !margin.is_negative()
                    && points.iter().all(|p| &dot(coefficients, p) >= margin)
            }
            (Verdict::Inseparable, Witness::OrthantCover { cover }) => {
                cover.len() == 1usize << self.dim
                    && cover.iter().all(|(pattern, &i)| {
                        i < points.len() && sign_pattern(&points[i]).as_deref() == Some(pattern)
                    })
            }
            (Verdict::Inseparable, Witness::PositiveCombination { rank: r, weights }) => {
                *r == self.dim
                    && rank(points) == self.dim
                    && weights.len() == points.len()
                    && weights.iter().all(|w| w.is_positive())
                    && (0..self.dim).all(|j| {
                        weights
                            .iter()
                            .zip(points)
                            .fold(Q::zero(), |acc, (w, p)| acc + w * &p[j])
                            .is_zero()
                    })
            }
            _ => false,
        }
    }

    /// The separating functional, when the verdict is separable.
    pub fn functional(&self) -> Option<&[Q]> {
        match &self.witness {
            Witness::Functional { coefficients, .. } => Some(coefficients),
            _ => None,
        }
    }

    /// The separating functional as a float functional on ℝ^ω.
    pub fn linear_functional(&self) -> Option<LinearFunctional> {
        self.functional()
            .and_then(|c| LinearFunctional::new(c.iter().map(exact::ratio_to_f64).collect()).ok())
    }
}

/// v ≠ 0 and ⟨v, p⟩ ≥ 0 for every point, exactly.
pub fn verify_functional(v: &[Q], points: &[Vec<Q>]) -> bool {
    v.iter().any(|c| !c.is_zero())
        && points
            .iter()
            .all(|p| p.len() == v.len() && !dot(v, p).is_negative())
}

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Exact conversion of float points; every finite double is a dyadic rational.
pub fn rationalize(points: &[Vec<f64>]) -> Vec<Vec<Q>> {
    points
        .iter()
        .map(|p| p.iter().map(|&v| exact::rational_from_f64(v)).collect())
        .collect()
}

fn validate(points: &[Vec<Q>]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(Error::EmptyInput);
    };
    let n = first.len();
    if n == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    if let Some(bad) = points.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    Ok(n)
}

/// "+" / "-" per coordinate, or None when some coordinate is zero.
fn sign_pattern(p: &[Q]) -> Option<String> {
    p.iter()
        .map(|v| {
            if v.is_positive() {
                Some('+')
            } else if v.is_negative() {
                Some('-')
            } else {
                None
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthantCoverage {
    pub covered: bool,
    /// First point found in each open orthant.
    pub cover: BTreeMap<String, usize>,
    /// Points with a zero coordinate; they lie in no open orthant.
    pub on_boundary: Vec<usize>,
}

/// Whether every one of the 2^n open orthants contains a point.
pub fn orthant_coverage(points: &[Vec<Q>]) -> Result<OrthantCoverage> {
    let n = validate(points)?;
    let mut cover = BTreeMap::new();
    let mut on_boundary = Vec::new();
    for (i, p) in points.iter().enumerate() {
        match sign_pattern(p) {
            Some(pattern) => {
                cover.entry(pattern).or_insert(i);
            }
            None => on_boundary.push(i),
        }
    }
    if !on_boundary.is_empty() {
        debug!(
            "{} point(s) have a zero coordinate and count for no orthant",
            on_boundary.len()
        );
    }
    let covered = n < usize::BITS as usize && cover.len() == 1usize << n;
    Ok(OrthantCoverage {
        covered,
        cover,
        on_boundary,
    })
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let lead = m[r][c].clone();
        for v in m[r].iter_mut() {
            *v = &*v / &lead;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v = &*v - &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(points: &[Vec<Q>]) -> usize {
    let mut m = points.to_vec();
    rref(&mut m).len()
}

/// Nonzero v with ⟨v, p⟩ = 0 for every point, if the points do not span ℝ^n.
/// The first non-pivot coordinate is set to 1, so a coordinate that vanishes
/// on every point after a full-rank block yields exactly e_k.
fn null_vector(points: &[Vec<Q>], n: usize) -> Option<Vec<Q>> {
    let mut m = points.to_vec();
    let pivots = rref(&mut m);
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut v = vec![Q::zero(); n];
    v[free] = Q::one();
    for (row, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[row][free].clone();
    }
    Some(v)
}

/// Margin LP through its dual; returns (t*, v) with ⟨v, p_i⟩ ≥ t* for all i.
fn max_margin(points: &[Vec<Q>], n: usize) -> (Q, Vec<Q>) {
    let m = points.len();
    // Columns: y_1..y_m, e⁺_1..e⁺_n, e⁻_1..e⁻_n.
    let width = m + 2 * n;
    let mut a = Vec::with_capacity(n + 1);
    for j in 0..n {
        let mut row = vec![Q::zero(); width];
        for (i, p) in points.iter().enumerate() {
            row[i] = p[j].clone();
        }
        row[m + j] = -Q::one();
        row[m + n + j] = Q::one();
        a.push(row);
    }
    let mut simplex_row = vec![Q::zero(); width];
    for v in simplex_row.iter_mut().take(m) {
        *v = Q::one();
    }
    a.push(simplex_row);
    let mut b = vec![Q::zero(); n];
    b.push(Q::one());
    let mut c = vec![Q::zero(); width];
    for v in c.iter_mut().skip(m) {
        *v = Q::one();
    }
    match lp::solve(&StandardLp { a, b, c }) {
        LpOutcome::Optimal { value, duals, .. } => {
            let v = duals[..n].iter().map(|w| -w.clone()).collect();
            (value, v)
        }
        other => unreachable!("margin LP is feasible and bounded, got {other:?}"),
    }
}

/// Stiemke's alternative: y > 0 with Σ y_i p_i = 0, or v with ⟨v, p_i⟩ ≥ 0
/// and Σ_i ⟨v, p_i⟩ > 0.
fn stiemke(points: &[Vec<Q>], n: usize) -> std::result::Result<Vec<Q>, Vec<Q>> {
    let m = points.len();
    // y = 1 + z, z ≥ 0:  Σ z_i p_i = −Σ p_i.
    let a: Vec<Vec<Q>> = (0..n)
        .map(|j| points.iter().map(|p| p[j].clone()).collect())
        .collect();
    let b: Vec<Q> = (0..n)
        .map(|j| -points.iter().fold(Q::zero(), |acc, p| acc + &p[j]))
        .collect();
    let c = vec![Q::zero(); m];
    match lp::solve(&StandardLp { a, b, c }) {
        LpOutcome::Optimal { x, .. } => Ok(x.into_iter().map(|z| z + Q::one()).collect()),
        LpOutcome::Infeasible { farkas } => Err(farkas),
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

/// A nonzero v with ⟨v, p⟩ ≥ 0 for every point, or None when the points are
/// inseparable.
pub fn separating_functional(points: &[Vec<Q>]) -> Result<Option<Vec<Q>>> {
    let n = validate(points)?;
    Ok(match functional_search(points, n) {
        Search::Separable { v, .. } => Some(v),
        Search::Inseparable { .. } => None,
    })
}

enum Search {
    Separable { v: Vec<Q>, margin: Q },
    Inseparable { weights: Vec<Q> },
}

fn functional_search(points: &[Vec<Q>], n: usize) -> Search {
    if let Some(v) = null_vector(points, n) {
        return Search::Separable {
            v,
            margin: Q::zero(),
        };
    }
    let (t, v) = max_margin(points, n);
    if t.is_positive() {
        return Search::Separable { v, margin: t };
    }
    match stiemke(points, n) {
        Ok(weights) => Search::Inseparable { weights },
        Err(v) => Search::Separable {
            v,
            margin: Q::zero(),
        },
    }
}

/// Decides separability, with the orthant cover as a fast path to the
/// inseparable verdict.
pub fn decide(points: &[Vec<Q>]) -> Result<SeparationCertificate> {
    let n = validate(points)?;
    let coverage = orthant_coverage(points)?;
    let cert = if coverage.covered {
        SeparationCertificate {
            verdict: Verdict::Inseparable,
            dim: n,
            points: points.len(),
            witness: Witness::OrthantCover {
                cover: coverage.cover,
            },
        }
    } else {
        match functional_search(points, n) {
            Search::Separable { v, margin } => SeparationCertificate {
                verdict: Verdict::Separable,
                dim: n,
                points: points.len(),
                witness: Witness::Functional {
                    coefficients: v,
                    margin,
                },
            },
            Search::Inseparable { weights } => SeparationCertificate {
                verdict: Verdict::Inseparable,
                dim: n,
                points: points.len(),
                witness: Witness::PositiveCombination { rank: n, weights },
            },
        }
    };
    if !cert.verify(points) {
        return Err(Error::CertificateRejected(format!("{:?}", cert.witness)));
    }
    Ok(cert)
}

pub fn decide_f64(points: &[Vec<f64>]) -> Result<SeparationCertificate> {
    decide(&rationalize(points))
}

mod ratio_string {
    use super::Q;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::exact::format_ratio(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        crate::exact::parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}

mod ratio_strings {
    use super::Q;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(crate::exact::format_ratio)
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| crate::exact::parse_ratio(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
