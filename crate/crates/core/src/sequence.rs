//! Finitely supported vectors of ℝ^ω, the product metric, truncations π_n,
//! and continuous linear functionals.

use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finitely supported real sequence (a_1, a_2, …, a_k, 0, 0, …).
///
/// Trailing zeros are trimmed, so two vectors are equal iff their supports
/// and values agree.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "SeqVectorRepr", into = "SeqVectorRepr")]
pub struct SeqVector {
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SeqVectorRepr {
    support: usize,
    values: Vec<f64>,
}

impl TryFrom<SeqVectorRepr> for SeqVector {
    type Error = String;
    fn try_from(r: SeqVectorRepr) -> std::result::Result<Self, String> {
        if r.values.len() != r.support {
            return Err(format!(
                "declared support {} but {} values",
                r.support,
                r.values.len()
            ));
        }
        Ok(SeqVector::new(r.values))
    }
}

impl From<SeqVector> for SeqVectorRepr {
    fn from(v: SeqVector) -> Self {
        SeqVectorRepr {
            support: v.values.len(),
            values: v.values,
        }
    }
}

impl SeqVector {
    pub fn new(mut values: Vec<f64>) -> Self {
        while values.last() == Some(&0.0) {
            values.pop();
        }
        Self { values }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Standard basis vector e_k (1-based).
    pub fn basis(k: usize) -> Self {
        assert!(k >= 1, "coordinates are 1-based");
        let mut values = vec![0.0; k];
        values[k - 1] = 1.0;
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of coordinates up to the last nonzero one.
    pub fn support(&self) -> usize {
        self.values.len()
    }

    /// Coordinate k (1-based); zero beyond the support.
    pub fn get(&self, k: usize) -> f64 {
        assert!(k >= 1, "coordinates are 1-based");
        self.values.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// π_n: keeps coordinates 1..=n.
    pub fn truncate(&self, n: usize) -> Self {
        Self::new(self.values.iter().take(n).copied().collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.values.iter().map(|v| v * s).collect())
    }

    /// First `n` coordinates, zero padded.
    pub fn padded(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|k| self.get(k)).collect()
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl From<Vec<f64>> for SeqVector {
    fn from(v: Vec<f64>) -> Self {
        Self::new(v)
    }
}

fn zip_with(a: &SeqVector, b: &SeqVector, f: impl Fn(f64, f64) -> f64) -> SeqVector {
    let n = a.support().max(b.support());
    SeqVector::new(
        (0..n)
            .map(|i| {
                let x = a.values.get(i).copied().unwrap_or(0.0);
                let y = b.values.get(i).copied().unwrap_or(0.0);
                f(x, y)
            })
            .collect(),
    )
}

impl Add for &SeqVector {
    type Output = SeqVector;
    fn add(self, rhs: &SeqVector) -> SeqVector {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &SeqVector {
    type Output = SeqVector;
    fn sub(self, rhs: &SeqVector) -> SeqVector {
        zip_with(self, rhs, |x, y| x - y)
    }
}

/// Σ_n 2^{-n} |a_n − b_n| / (1 + |a_n − b_n|), summed over the joint support.
/// Exact for finitely supported inputs; always in [0, 1).
pub fn product_metric(a: &SeqVector, b: &SeqVector) -> f64 {
    let n = a.support().max(b.support());
    metric_terms(n, |i| {
        let x = a.values.get(i).copied().unwrap_or(0.0);
        let y = b.values.get(i).copied().unwrap_or(0.0);
        (x - y).abs()
    })
}

/// The product metric applied to coordinate-wise absolute differences
/// `diff(i)` for 0-based i < n.
pub(crate) fn metric_terms(n: usize, diff: impl Fn(usize) -> f64) -> f64 {
    let mut weight = 0.5;
    let mut total = 0.0;
    for i in 0..n {
        let t = diff(i);
        total += weight * t / (1.0 + t);
        weight *= 0.5;
    }
    total
}

/// d(a, π_n a) < Σ_{i>n} 2^{-i} = 2^{-n}.
pub fn truncation_bound(n: usize) -> f64 {
    0.5f64.powi(n as i32)
}

/// A continuous linear functional L = A∘π_n on ℝ^ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LinearFunctional {
    coefficients: Vec<f64>,
}

impl LinearFunctional {
    /// The level is the number of coefficients given; at least one must be nonzero.
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().all(|&c| c == 0.0) {
            return Err(Error::ZeroFunctional);
        }
        Ok(Self { coefficients })
    }

    /// Coordinate functional e_k (1-based), at level k.
    pub fn coordinate(k: usize) -> Self {
        assert!(k >= 1, "coordinates are 1-based");
        let mut coefficients = vec![0.0; k];
        coefficients[k - 1] = 1.0;
        Self { coefficients }
    }

    pub fn level(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn apply(&self, a: &SeqVector) -> f64 {
        self.coefficients
            .iter()
            .zip(a.values())
            .map(|(c, v)| c * v)
            .sum()
    }
}

impl TryFrom<Vec<f64>> for LinearFunctional {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LinearFunctional> for Vec<f64> {
    fn from(l: LinearFunctional) -> Self {
        l.coefficients
    }
}

pub fn functional_apply(l: &LinearFunctional, a: &SeqVector) -> f64 {
    l.apply(a)
}
