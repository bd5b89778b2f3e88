//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Problems are in standard form: minimize cᵀx subject to Ax = b, x ≥ 0.
//! The artificial columns stay in the tableau after phase one so that B^{-1},
//! and with it the simplex multipliers, can be read off at the end.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

type Q = BigRational;

#[derive(Debug, Clone, PartialEq)]
pub struct StandardLp {
    /// m rows of n coefficients.
    pub a: Vec<Vec<Q>>,
    pub b: Vec<Q>,
    pub c: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<Q>,
        value: Q,
        /// Multipliers y with Aᵀy ≤ c and bᵀy = value.
        duals: Vec<Q>,
    },
    /// y with Aᵀy ≥ 0 and bᵀy < 0.
    Infeasible {
        farkas: Vec<Q>,
    },
    Unbounded,
}

struct Tableau {
    /// m rows, each n + m (artificials) + 1 (rhs) entries.
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    n: usize,
    m: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Q {
        &self.rows[i][self.n + self.m]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &factor * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Reduced costs c_j − c_Bᵀ B^{-1} A_j for the first `limit` columns.
    fn reduced_costs(&self, cost: &[Q], limit: usize) -> Vec<Q> {
        (0..limit)
            .map(|j| {
                let mut r = cost[j].clone();
                for (i, &bv) in self.basis.iter().enumerate() {
                    let a = &self.rows[i][j];
                    if !a.is_zero() && !cost[bv].is_zero() {
                        r -= &cost[bv] * a;
                    }
                }
                r
            })
            .collect()
    }

    /// Runs simplex iterations on `cost` (length n + m) allowing only the first
    /// `limit` columns to enter. Returns false when unbounded.
    fn optimize(&mut self, cost: &[Q], limit: usize) -> bool {
        loop {
            let rc = self.reduced_costs(cost, limit);
            // Bland: lowest-index improving column.
            let Some(col) = (0..limit).find(|&j| rc[j].is_negative() && !self.basis.contains(&j))
            else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.m {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, col);
        }
    }

    /// c_Bᵀ B^{-1}, with B^{-1} held in the artificial columns.
    fn multipliers(&self, cost: &[Q]) -> Vec<Q> {
        (0..self.m)
            .map(|k| {
                self.basis
                    .iter()
                    .enumerate()
                    .fold(Q::zero(), |acc, (i, &bv)| {
                        acc + &cost[bv] * &self.rows[i][self.n + k]
                    })
            })
            .collect()
    }
}

pub fn solve(lp: &StandardLp) -> LpOutcome {
    let m = lp.a.len();
    let n = lp.c.len();
    debug_assert!(lp.a.iter().all(|r| r.len() == n));
    debug_assert_eq!(lp.b.len(), m);

    // Rows with negative rhs are negated; remember to undo that in multipliers.
    let flip: Vec<bool> = lp.b.iter().map(|v| v.is_negative()).collect();
    let rows = (0..m)
        .map(|i| {
            let s = if flip[i] {
                -Q::from_integer(1.into())
            } else {
                Q::from_integer(1.into())
            };
            let mut row: Vec<Q> = lp.a[i].iter().map(|v| v * &s).collect();
            row.extend((0..m).map(|k| {
                if k == i {
                    Q::from_integer(1.into())
                } else {
                    Q::zero()
                }
            }));
            row.push(&lp.b[i] * &s);
            row
        })
        .collect();
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        n,
        m,
    };

    let mut phase1 = vec![Q::zero(); n + m];
    for c in phase1.iter_mut().skip(n) {
        *c = Q::from_integer(1.into());
    }
    t.optimize(&phase1, n);
    let infeasibility = t
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bv)| bv >= n)
        .fold(Q::zero(), |acc, (i, _)| acc + t.rhs(i));
    let unflip = |mut y: Vec<Q>| {
        for (v, &f) in y.iter_mut().zip(&flip) {
            if f {
                *v = -&*v;
            }
        }
        y
    };
    if infeasibility.is_positive() {
        let pi = t.multipliers(&phase1);
        let farkas = unflip(pi.into_iter().map(|v| -v).collect());
        return LpOutcome::Infeasible { farkas };
    }

    // Move zero-level artificials out of the basis where a structural column can replace them.
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| !t.rows[i][j].is_zero() && !t.basis.contains(&j)) {
                t.pivot(i, col);
            }
        }
    }

    let mut phase2 = lp.c.clone();
    phase2.extend((0..m).map(|_| Q::zero()));
    if !t.optimize(&phase2, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rhs(i).clone();
        }
    }
    let value = x
        .iter()
        .zip(&lp.c)
        .fold(Q::zero(), |acc, (xi, ci)| acc + xi * ci);
    let duals = unflip(t.multipliers(&phase2));
    LpOutcome::Optimal { x, value, duals }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn qs(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| q(x)).collect()
    }

    fn dot(a: &[Q], b: &[Q]) -> Q {
        a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
    }

    fn col(a: &[Vec<Q>], j: usize) -> Vec<Q> {
        a.iter().map(|r| r[j].clone()).collect()
    }

    #[test]
    fn small_optimum_with_duals() {
        // min -x1 - x2 s.t. x1 + 2 x2 + s1 = 4, 3 x1 + x2 + s2 = 6.
        let lp = StandardLp {
            a: vec![qs(&[1, 2, 1, 0]), qs(&[3, 1, 0, 1])],
            b: qs(&[4, 6]),
            c: qs(&[-1, -1, 0, 0]),
        };
        let LpOutcome::Optimal { x, value, duals } = solve(&lp) else {
            panic!("expected optimum");
        };
        assert_eq!(x[0], Q::new(8.into(), 5.into()));
        assert_eq!(x[1], Q::new(6.into(), 5.into()));
        assert_eq!(value, Q::new((-14).into(), 5.into()));
        assert_eq!(dot(&duals, &lp.b), value);
        for j in 0..4 {
            assert!(dot(&duals, &col(&lp.a, j)) <= lp.c[j]);
        }
    }

    #[test]
    fn infeasible_gives_farkas() {
        // x1 + x2 = -1 with x >= 0 is infeasible.
        let lp = StandardLp {
            a: vec![qs(&[1, 1]), qs(&[1, -1])],
            b: qs(&[-1, 3]),
            c: qs(&[0, 0]),
        };
        let LpOutcome::Infeasible { farkas } = solve(&lp) else {
            panic!("expected infeasible");
        };
        for j in 0..2 {
            assert!(!dot(&farkas, &col(&lp.a, j)).is_negative());
        }
        assert!(dot(&farkas, &lp.b).is_negative());
    }

    #[test]
    fn unbounded_detected() {
        // min -x1 s.t. x1 - x2 = 1.
        let lp = StandardLp {
            a: vec![qs(&[1, -1])],
            b: qs(&[1]),
            c: qs(&[-1, 0]),
        };
        assert_eq!(solve(&lp), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let lp = StandardLp {
            a: vec![qs(&[1, 1, 0]), qs(&[2, 2, 0]), qs(&[0, 1, 1])],
            b: qs(&[2, 4, 3]),
            c: qs(&[1, 0, 0]),
        };
        let LpOutcome::Optimal { x, value, .. } = solve(&lp) else {
            panic!("expected optimum");
        };
        assert_eq!(value, q(0));
        assert_eq!(x, qs(&[0, 2, 1]));
    }
}
