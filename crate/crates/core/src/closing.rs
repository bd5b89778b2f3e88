//! Exact closing lemma for toral automorphisms: near-returns, the shadowing
//! periodic point, and the exponential shadowing estimate.

use std::io::Write;

use log::warn;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cocycle::Cocycle;
use crate::error::{Error, Result};
use crate::exact;
use crate::torus::{torus_distance_sq_exact, RationalTorusPoint, ToralAutomorphism, TorusPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosingConstants {
    pub c: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearReturn {
    pub x: TorusPoint,
    pub n: u32,
    pub epsilon: f64,
}

fn check_dim(a: &ToralAutomorphism, x: &TorusPoint) -> Result<()> {
    if a.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: x.dim(),
        });
    }
    Ok(())
}

fn exact_coords(x: &TorusPoint) -> Vec<BigRational> {
    x.coords()
        .iter()
        .map(|&v| exact::rational_from_f64(v))
        .collect()
}

fn exact_step(a: &ToralAutomorphism, v: &[BigRational]) -> Vec<BigRational> {
    a.matrix()
        .mul_rational_vec(v)
        .iter()
        .map(exact::frac)
        .collect()
}

fn exact_distance(x: &[BigRational], y: &[BigRational]) -> f64 {
    exact::ratio_to_f64(&torus_distance_sq_exact(x, y)).sqrt()
}

/// The orbit x, Ax, …, A^k x of the exact value of the float point x.
fn exact_orbit(a: &ToralAutomorphism, x: &[BigRational], k: u32) -> Vec<Vec<BigRational>> {
    let mut out = Vec::with_capacity(k as usize + 1);
    out.push(x.to_vec());
    for i in 0..k as usize {
        let next = exact_step(a, &out[i]);
        out.push(next);
    }
    out
}

/// Every n in 1..=k with d(A^n x, x) < ε, distances computed along the exact orbit.
pub fn find_near_returns(
    a: &ToralAutomorphism,
    x: &TorusPoint,
    epsilon: f64,
    k: u32,
) -> Result<Vec<NearReturn>> {
    check_dim(a, x)?;
    if epsilon.is_nan() || epsilon <= 0.0 || k == 0 {
        return Err(Error::InvalidConfig(vec![format!(
            "near-return scan needs ε > 0 and K ≥ 1, got ε = {epsilon}, K = {k}"
        )]));
    }
    let orbit = exact_orbit(a, &exact_coords(x), k);
    Ok((1..=k)
        .filter_map(|n| {
            let d = exact_distance(&orbit[n as usize], &orbit[0]);
            (d < epsilon).then(|| NearReturn {
                x: x.clone(),
                n,
                epsilon: d,
            })
        })
        .collect())
}

/// The fixed point of A^n shadowing x: p = (A^n − I)^{-1} m mod 1 with
/// m = round((A^n − I) x̂), rounding half to even.
pub fn close_orbit(a: &ToralAutomorphism, near: &NearReturn) -> Result<RationalTorusPoint> {
    check_dim(a, &near.x)?;
    let m = a.matrix().pow(near.n).minus_identity();
    let det = m.det();
    if det.is_zero() {
        return Err(Error::NonHyperbolic { n: near.n });
    }
    let y = m.mul_rational_vec(&exact_coords(&near.x));
    let lattice: Vec<BigRational> = y
        .iter()
        .map(|v| {
            let (r, tie) = exact::round_half_even(v);
            if tie {
                warn!("rounding tie at n = {} for {:?}", near.n, near.x.coords());
            }
            BigRational::from_integer(r)
        })
        .collect();
    let det_q = BigRational::from_integer(det);
    let p: Vec<BigRational> = m
        .adjugate()
        .mul_rational_vec(&lattice)
        .iter()
        .map(|v| v / &det_q)
        .collect();
    let p = RationalTorusPoint::from_ratios(&p)?;
    if !is_periodic(a, &p, near.n) {
        return Err(Error::CertificateRejected(format!(
            "closing point {p} is not fixed by A^{}",
            near.n
        )));
    }
    Ok(p)
}

/// A^n p ≡ p, checked exactly.
pub fn is_periodic(a: &ToralAutomorphism, p: &RationalTorusPoint, n: u32) -> bool {
    let mut q = p.clone();
    for _ in 0..n {
        q = match a.apply_exact(&q) {
            Ok(v) => v,
            Err(_) => return false,
        };
    }
    &q == p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowingReport {
    pub n: u32,
    pub epsilon: f64,
    pub lambda: f64,
    /// d(A^i x, A^i p) for i = 0..=n.
    pub distances: Vec<f64>,
    /// distances[i] / (λ^{min(i, n−i)} ε); empty when ε = 0.
    pub ratios: Vec<f64>,
    /// max ratio, the empirical c.
    pub c: Option<f64>,
    pub exact_shadowing: bool,
}

impl ShadowingReport {
    pub fn within(&self, c_max: f64) -> bool {
        self.c.is_none_or(|c| c <= c_max)
    }

    pub fn constants(&self) -> Option<ClosingConstants> {
        self.c.map(|c| ClosingConstants {
            c,
            lambda: self.lambda,
        })
    }
}

fn exact_point_orbit(
    a: &ToralAutomorphism,
    p: &RationalTorusPoint,
    k: u32,
) -> Vec<Vec<BigRational>> {
    exact_orbit(a, &p.ratios(), k)
}

pub fn verify_shadowing(
    a: &ToralAutomorphism,
    x: &TorusPoint,
    p: &RationalTorusPoint,
    n: u32,
) -> Result<ShadowingReport> {
    check_dim(a, x)?;
    let xs = exact_orbit(a, &exact_coords(x), n);
    let ps = exact_point_orbit(a, p, n);
    let distances: Vec<f64> = xs
        .iter()
        .zip(&ps)
        .map(|(u, v)| exact_distance(u, v))
        .collect();
    let epsilon = exact_distance(&xs[n as usize], &xs[0]);
    let lambda = a.contraction_rate();
    if epsilon == 0.0 {
        return Ok(ShadowingReport {
            n,
            epsilon,
            lambda,
            exact_shadowing: distances.iter().all(|&d| d == 0.0),
            distances,
            ratios: Vec::new(),
            c: None,
        });
    }
    let ratios: Vec<f64> = distances
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let j = (i as u32).min(n - i as u32);
            d / (lambda.powi(j as i32) * epsilon)
        })
        .collect();
    let c = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ShadowingReport {
        n,
        epsilon,
        lambda,
        distances,
        ratios,
        c: Some(c),
        exact_shadowing: false,
    })
}

/// Σ_{i<n} ‖f(A^i x) − f(A^i p)‖₂, over the cocycle's carried coordinates.
pub fn weight_closeness(
    f: &Cocycle,
    a: &ToralAutomorphism,
    x: &TorusPoint,
    p: &RationalTorusPoint,
    n: u32,
) -> Result<f64> {
    check_dim(a, x)?;
    if f.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: f.dim(),
        });
    }
    let xs = exact_orbit(a, &exact_coords(x), n);
    let ps = exact_point_orbit(a, p, n);
    let to_f64 = |v: &[BigRational]| -> Vec<f64> { v.iter().map(exact::ratio_to_f64).collect() };
    Ok(xs
        .iter()
        .zip(&ps)
        .take(n as usize)
        .map(|(u, v)| {
            let fu = f.values_at(&to_f64(u));
            let fv = f.values_at(&to_f64(v));
            fu.iter()
                .zip(&fv)
                .map(|(s, t)| (s - t) * (s - t))
                .sum::<f64>()
                .sqrt()
        })
        .sum())
}

/// L_f·c·ε·2/(1−λ).
pub fn weight_closeness_bound(lipschitz: f64, constants: ClosingConstants, epsilon: f64) -> f64 {
    lipschitz * constants.c * epsilon * 2.0 / (1.0 - constants.lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub trials: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    pub n_max: u32,
    pub c_max: f64,
    pub seed: u64,
    /// Give up after this many random base points.
    pub max_samples: usize,
}

impl Default for TrialSpec {
    fn default() -> Self {
        Self {
            trials: 100,
            eps_min: 1e-4,
            eps_max: 1e-2,
            n_max: 25,
            c_max: 10.0,
            seed: 0,
            max_samples: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub near: NearReturn,
    pub p: RationalTorusPoint,
    pub periodic: bool,
    pub max_ratio: Option<f64>,
    pub closeness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub spec: TrialSpec,
    pub samples_drawn: usize,
    pub trials: Vec<Trial>,
    pub fitted: ClosingConstants,
    pub all_periodic: bool,
    pub all_within_c_max: bool,
    pub lipschitz: Option<f64>,
    /// Trials whose closeness exceeded L_f·c·ε·2/(1−λ) with the fitted c.
    pub closeness_violations: Option<usize>,
}

/// Random near-returns with ε in [eps_min, eps_max], closed and checked.
/// When `f` is given, also compares weight closeness against its bound.
pub fn run_trials(
    a: &ToralAutomorphism,
    f: Option<&Cocycle>,
    spec: &TrialSpec,
) -> Result<TrialSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut trials = Vec::with_capacity(spec.trials);
    let mut samples = 0;
    let dim = a.dim();
    let mut cur = vec![0.0; dim];
    let mut next = vec![0.0; dim];
    while trials.len() < spec.trials && samples < spec.max_samples {
        samples += 1;
        let x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
        // Float prefilter; the exact scan below decides.
        cur.copy_from_slice(&x);
        let mut close = false;
        for _ in 0..spec.n_max {
            a.step_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            if crate::torus::torus_distance_unchecked(&cur, &x) < 2.0 * spec.eps_max {
                close = true;
                break;
            }
        }
        if !close {
            continue;
        }
        let x = TorusPoint::new(x)?;
        for near in find_near_returns(a, &x, spec.eps_max, spec.n_max)? {
            if near.epsilon < spec.eps_min || trials.len() == spec.trials {
                continue;
            }
            let p = close_orbit(a, &near)?;
            let report = verify_shadowing(a, &near.x, &p, near.n)?;
            let closeness = f
                .map(|f| weight_closeness(f, a, &near.x, &p, near.n))
                .transpose()?;
            trials.push(Trial {
                periodic: is_periodic(a, &p, near.n),
                max_ratio: report.c,
                near,
                p,
                closeness,
            });
        }
    }
    let c = trials
        .iter()
        .filter_map(|t| t.max_ratio)
        .fold(0.0, f64::max);
    let fitted = ClosingConstants {
        c,
        lambda: a.contraction_rate(),
    };
    let lipschitz = f.map(Cocycle::euclidean_lipschitz);
    let closeness_violations = lipschitz.map(|l| {
        trials
            .iter()
            .filter(|t| {
                t.closeness
                    .is_some_and(|w| w > weight_closeness_bound(l, fitted, t.near.epsilon))
            })
            .count()
    });
    Ok(TrialSummary {
        spec: spec.clone(),
        samples_drawn: samples,
        all_periodic: trials.iter().all(|t| t.periodic),
        all_within_c_max: c <= spec.c_max,
        trials,
        fitted,
        lipschitz,
        closeness_violations,
    })
}

impl TrialSummary {
    /// Columns: n, epsilon, max_ratio, fitted_c, closeness, closeness_bound, p.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "n",
            "epsilon",
            "max_ratio",
            "fitted_c",
            "closeness",
            "closeness_bound",
            "p",
        ])?;
        for t in &self.trials {
            let bound = self
                .lipschitz
                .map(|l| weight_closeness_bound(l, self.fitted, t.near.epsilon));
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:e}"));
            w.write_record([
                t.near.n.to_string(),
                format!("{:e}", t.near.epsilon),
                opt(t.max_ratio),
                format!("{:e}", self.fitted.c),
                opt(t.closeness),
                opt(bound),
                t.p.to_strings().join(" "),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// ε-recurrence helper kept for the zero-distance case: the distance from
/// A^n x to x along the exact orbit.
pub fn return_distance(a: &ToralAutomorphism, x: &TorusPoint, n: u32) -> Result<f64> {
    check_dim(a, x)?;
    let orbit = exact_orbit(a, &exact_coords(x), n);
    let d = torus_distance_sq_exact(&orbit[n as usize], &orbit[0]);
    Ok(if d.is_zero() {
        0.0
    } else {
        exact::ratio_to_f64(&d).sqrt()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::periodic_points;

    fn pt(c: &[f64]) -> TorusPoint {
        TorusPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn fixed_point_returns_every_time() {
        let a = ToralAutomorphism::cat_map();
        let r = find_near_returns(&a, &pt(&[0.0, 0.0]), 1e-12, 6).unwrap();
        assert_eq!(r.len(), 6);
        assert!(r.iter().all(|n| n.epsilon == 0.0));
    }

    #[test]
    fn large_epsilon_accepts_all() {
        let a = ToralAutomorphism::cat_map();
        let r = find_near_returns(&a, &pt(&[0.137, 0.712]), 1.0, 10).unwrap();
        assert_eq!(
            r.iter().map(|n| n.n).collect::<Vec<_>>(),
            (1..=10).collect::<Vec<_>>()
        );
    }

    #[test]
    fn closes_to_nearest_period_two_point() {
        let a = ToralAutomorphism::cat_map();
        let x = pt(&[0.21, 0.39]);
        let near = NearReturn {
            epsilon: return_distance(&a, &x, 2).unwrap(),
            x: x.clone(),
            n: 2,
        };
        let p = close_orbit(&a, &near).unwrap();
        assert_eq!(p, RationalTorusPoint::from_i64(&[1, 2], 5).unwrap());
        // Oracle: the nearest of the five fixed points of A².
        let set = periodic_points(&a, 2).unwrap();
        let nearest = set
            .points
            .iter()
            .min_by(|u, v| {
                let du = crate::torus::torus_distance(&u.to_torus_point(), &x).unwrap();
                let dv = crate::torus::torus_distance(&v.to_torus_point(), &x).unwrap();
                du.total_cmp(&dv)
            })
            .unwrap();
        assert_eq!(&p, nearest);
    }

    #[test]
    fn fixed_point_closes_to_itself() {
        let a = ToralAutomorphism::cat_map();
        let x = pt(&[0.2, 0.4]);
        let near = NearReturn {
            x: x.clone(),
            n: 2,
            epsilon: 0.0,
        };
        let p = close_orbit(&a, &near).unwrap();
        assert_eq!(p.to_torus_point(), x);
        let report =
            verify_shadowing(&a, &pt(&[0.0, 0.0]), &RationalTorusPoint::origin(2), 3).unwrap();
        assert!(report.exact_shadowing && report.c.is_none());
    }

    #[test]
    fn lambda_is_reciprocal_of_expansion() {
        let a = ToralAutomorphism::cat_map();
        let expected = 2.0 / (3.0 + 5f64.sqrt());
        assert!((a.contraction_rate() - expected).abs() < 1e-12);
    }

    #[test]
    fn constant_cocycle_has_zero_closeness() {
        let a = ToralAutomorphism::cat_map();
        let f = Cocycle::constant(2, &crate::sequence::SeqVector::new(vec![1.0, -3.0]));
        let x = pt(&[0.21, 0.39]);
        let p = RationalTorusPoint::from_i64(&[1, 2], 5).unwrap();
        assert_eq!(weight_closeness(&f, &a, &x, &p, 2).unwrap(), 0.0);
        assert_eq!(
            weight_closeness(&f, &a, &p.to_torus_point(), &p, 2).unwrap(),
            0.0
        );
    }

    #[test]
    fn small_trial_run() {
        let a = ToralAutomorphism::cat_map();
        let spec = TrialSpec {
            trials: 10,
            seed: 3,
            ..TrialSpec::default()
        };
        let s = run_trials(&a, None, &spec).unwrap();
        assert_eq!(s.trials.len(), 10);
        assert!(s.all_periodic);
        assert!(s.all_within_c_max, "c = {}", s.fitted.c);
        for t in &s.trials {
            assert!((1e-4..1e-2).contains(&t.near.epsilon));
        }
    }
}
