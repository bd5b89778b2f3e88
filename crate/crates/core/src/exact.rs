//! Arbitrary-size integer matrices and rational helpers used on every exact path.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Square matrix over ℤ, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    dim: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let dim = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    bad_row: i,
                    bad_len: row.len(),
                });
            }
        }
        let data = rows.iter().flatten().map(|&v| BigInt::from(v)).collect();
        Ok(Self { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = BigInt::one();
        }
        m
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![BigInt::zero(); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.dim + j]
    }

    fn get_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    *out.get_mut(i, j) += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn minus_identity(&self) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            *m.get_mut(i, i) -= 1;
        }
        m
    }

    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn mul_rational_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(BigRational::zero(), |acc, (a, b)| {
                        acc + BigRational::from_integer(a.clone()) * b
                    })
            })
            .collect()
    }

    /// Fraction-free (Bareiss) elimination; exact for any size of entries.
    pub fn det(&self) -> BigInt {
        let n = self.dim;
        let mut m = self.data.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k * n + k].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !m[r * n + k].is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..n {
                    m.swap(k * n + j, p * n + j);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &m[i * n + j] * &m[k * n + k] - &m[i * n + k] * &m[k * n + j];
                    m[i * n + j] = v / &prev;
                }
            }
            prev = m[k * n + k].clone();
        }
        if n == 0 {
            return BigInt::one();
        }
        sign * &m[(n - 1) * n + (n - 1)]
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let n = self.dim;
        let mut data = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != skip_row) {
            for j in (0..n).filter(|&j| j != skip_col) {
                data.push(self.get(i, j).clone());
            }
        }
        Self { dim: n - 1, data }
    }

    /// adj(M) with M·adj(M) = det(M)·I.
    pub fn adjugate(&self) -> Self {
        let n = self.dim;
        if n == 1 {
            return Self::identity(1);
        }
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let cof = self.minor(i, j).det();
                *out.get_mut(j, i) = if (i + j) % 2 == 0 { cof } else { -cof };
            }
        }
        out
    }

    /// Reduces the columns of the matrix by unimodular column operations to a
    /// lower-triangular basis of the same lattice and returns the absolute
    /// diagonal. The box `0 <= m_i < diag_i` is a complete set of coset
    /// representatives of ℤ^d / Mℤ^d when the matrix is nonsingular.
    pub fn lattice_diagonal(&self) -> Vec<BigInt> {
        let n = self.dim;
        let mut h = self.clone();
        for i in 0..n {
            for j in i + 1..n {
                while !h.get(i, j).is_zero() {
                    let a = h.get(i, i).clone();
                    let b = h.get(i, j).clone();
                    let eg = a.extended_gcd(&b);
                    let (g, s, t) = (eg.gcd, eg.x, eg.y);
                    let (ag, bg) = (&a / &g, &b / &g);
                    for r in 0..n {
                        let ci = h.get(r, i).clone();
                        let cj = h.get(r, j).clone();
                        *h.get_mut(r, i) = &s * &ci + &t * &cj;
                        *h.get_mut(r, j) = &ag * &cj - &bg * &ci;
                    }
                }
            }
        }
        (0..n).map(|i| h.get(i, i).abs()).collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|v| v.to_f64().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect()
    }
}

pub fn format_rational(num: &BigInt, den: &BigInt) -> String {
    format!("{num}/{den}")
}

pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let bad = || Error::ParseRational(s.to_string());
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Exact value of a finite float.
pub fn rational_from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Round half to even. Returns the integer and whether the input was a tie.
pub fn round_half_even(r: &BigRational) -> (BigInt, bool) {
    let floor = r.floor().to_integer();
    let frac = r - BigRational::from_integer(floor.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    match frac.cmp(&half) {
        std::cmp::Ordering::Less => (floor, false),
        std::cmp::Ordering::Greater => (floor + 1, false),
        std::cmp::Ordering::Equal => {
            if floor.is_even() {
                (floor, true)
            } else {
                (floor + 1, true)
            }
        }
    }
}

/// Fractional part in [0, 1).
pub fn frac(r: &BigRational) -> BigRational {
    r - r.floor()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn det_and_adjugate() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.det(), BigInt::from(1));
        let a3 = a.pow(3);
        assert_eq!(a3, m(&[&[13, 8], &[8, 5]]));
        let b = m(&[&[0, 0, 1], &[1, 0, 1], &[0, 1, 0]]);
        assert_eq!(b.det(), BigInt::from(1));
        assert_eq!(b.mul(&b.adjugate()), IntMatrix::identity(3));
        let c = m(&[&[3, 1, 4], &[1, 5, 9], &[2, 6, 5]]);
        let det = c.det();
        assert_eq!(det, BigInt::from(-90));
        let mut scaled = IntMatrix::identity(3);
        for i in 0..3 {
            *scaled.get_mut(i, i) = det.clone();
        }
        assert_eq!(c.mul(&c.adjugate()), scaled);
        let sing = m(&[&[1, 2], &[2, 4]]);
        assert!(sing.det().is_zero());
    }

    #[test]
    fn lattice_diagonal_multiplies_to_det() {
        let a = m(&[&[2, 1], &[1, 1]]);
        for n in 1..=8 {
            let mm = a.pow(n).minus_identity();
            let diag = mm.lattice_diagonal();
            let prod: BigInt = diag.iter().product();
            assert_eq!(prod, mm.det().abs(), "n = {n}");
        }
    }

    #[test]
    fn rational_parse_and_round() {
        assert_eq!(
            parse_ratio("3/6").unwrap(),
            BigRational::new(1.into(), 2.into())
        );
        assert_eq!(
            parse_ratio("-4").unwrap(),
            BigRational::from_integer((-4).into())
        );
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x").is_err());
        let half = |n: i64| BigRational::new(n.into(), 2.into());
        assert_eq!(round_half_even(&half(5)), (BigInt::from(2), true));
        assert_eq!(round_half_even(&half(7)), (BigInt::from(4), true));
        assert_eq!(round_half_even(&half(-1)), (BigInt::from(0), true));
        assert_eq!(
            round_half_even(&BigRational::new(7.into(), 3.into())),
            (BigInt::from(2), false)
        );
    }
}
