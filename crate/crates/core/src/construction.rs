//! Inductive construction of an inseparable Lipschitz cocycle.
//!
//! A pool of 2^N periodic orbits carries tents of radius r centred at every
//! orbit point. At level ℓ the live orbits are grouped by the orthant of their
//! level-(ℓ−1) weights and each group is split by alternating signs, so every
//! orthant of ℝ^ℓ receives at least one orbit weight.

use std::collections::BTreeMap;

use log::info;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cocycle::{
    orbit_weight, periodic_data, periodic_orbits, supports_disjoint, Bump, Cocycle,
    CoordinateFunction, PeriodicData,
};
use crate::error::{Error, Result};
use crate::separation::{self, Verdict};
use crate::torus::{torus_distance_sq_exact, PeriodicOrbit, RationalTorusPoint, ToralAutomorphism};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelLog {
    pub level: usize,
    /// Orbit weight magnitude; each bump carries amplitude/period.
    pub amplitude: f64,
    pub lipschitz: f64,
    pub lipschitz_bound: f64,
    /// Sign given to each pool orbit, in pool order.
    pub signs: Vec<i8>,
    pub orthants_covered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionLog {
    pub params: ConstructionParams,
    pub pool: Vec<PeriodicOrbit>,
    pub min_point_distance: f64,
    pub radius: f64,
    pub supports_disjoint: bool,
    pub per_level: Vec<LevelLog>,
}

fn pattern(w: &[f64]) -> Option<String> {
    w.iter()
        .map(|&v| {
            if v > 0.0 {
                Some('+')
            } else if v < 0.0 {
                Some('-')
            } else {
                None
            }
        })
        .collect()
}

/// Minimal pairwise torus distance among `points`, computed exactly then
/// rounded down to a float.
fn min_distance(points: &[RationalTorusPoint]) -> f64 {
    let ratios: Vec<Vec<BigRational>> = points.iter().map(|p| p.ratios()).collect();
    let mut best: Option<BigRational> = None;
    for i in 0..ratios.len() {
        for j in i + 1..ratios.len() {
            let d = torus_distance_sq_exact(&ratios[i], &ratios[j]);
            if best.as_ref().is_none_or(|b| &d < b) {
                best = Some(d);
            }
        }
    }
    let sq = best.map_or(0.0, |b| crate::exact::ratio_to_f64(&b));
    // One ulp down keeps the float at or below the exact value.
    f64::from_bits(sq.sqrt().to_bits().saturating_sub(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub levels: usize,
    pub n_max: u32,
    pub budget: u64,
    /// Bump radius as a fraction of the minimal distance between pool points.
    pub radius_fraction: f64,
    /// Multiplies every amplitude. Orbit weights stay balanced, so f keeps
    /// mean zero; above 1 the Lipschitz margin of period-1 bumps shrinks and
    /// at 2 it is used up.
    pub gain: f64,
}

impl ConstructionParams {
    pub fn new(levels: usize, n_max: u32) -> Self {
        Self {
            levels,
            n_max,
            budget: crate::cocycle::DEFAULT_ENUMERATION_BUDGET,
            radius_fraction: 1.0 / 3.0,
            gain: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.levels == 0 || self.levels > 30 {
            errs.push(format!("levels must be in 1..=30, got {}", self.levels));
        }
        if self.n_max == 0 {
            errs.push("n_max must be positive".into());
        }
        // Past one half, tents around neighbouring points overlap.
        if !(self.radius_fraction > 0.0 && self.radius_fraction < 0.5) {
            errs.push(format!(
                "radius_fraction {} outside (0, 1/2)",
                self.radius_fraction
            ));
        }
        if !(self.gain > 0.0 && self.gain <= 2.0) {
            errs.push(format!("gain {} outside (0, 2]", self.gain));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errs))
        }
    }
}

/// Builds coordinates 1..=levels over the first 2^levels periodic orbits of
/// minimal period ≤ n_max, with the default radius and amplitude schedule.
pub fn construct_inseparable(
    a: &ToralAutomorphism,
    levels: usize,
    n_max: u32,
    budget: u64,
) -> Result<(Cocycle, ConstructionLog)> {
    construct_with(
        a,
        &ConstructionParams {
            budget,
            ..ConstructionParams::new(levels, n_max)
        },
    )
}

pub fn construct_with(
    a: &ToralAutomorphism,
    params: &ConstructionParams,
) -> Result<(Cocycle, ConstructionLog)> {
    params.validate()?;
    let ConstructionParams {
        levels,
        n_max,
        budget,
        ..
    } = *params;
    let needed = 1usize << levels;
    let orbits = periodic_orbits(a, n_max, budget)?;
    if orbits.len() < needed {
        return Err(Error::InsufficientOrbits {
            needed,
            available: orbits.len(),
            n_max,
        });
    }
    let pool: Vec<PeriodicOrbit> = orbits.into_iter().take(needed).collect();
    let orbit_points: Vec<Vec<RationalTorusPoint>> = pool.iter().map(|o| o.points(a)).collect();
    let all_points: Vec<RationalTorusPoint> = orbit_points.iter().flatten().cloned().collect();
    let min_point_distance = min_distance(&all_points);
    let radius = (min_point_distance * params.radius_fraction).min(0.49);
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::BumpCollision(format!(
            "minimal point distance {min_point_distance} leaves no room for bumps"
        )));
    }

    let dim = a.dim();
    let mut coordinates: Vec<CoordinateFunction> = Vec::with_capacity(levels);
    let mut weights: Vec<Vec<f64>> = vec![Vec::new(); needed];
    let mut per_level = Vec::with_capacity(levels);
    let mut disjoint = true;

    for level in 1..=levels {
        let scale = 0.5f64.powi(level as i32 - 1);
        let amplitude = params.gain * (scale * radius / 2.0).min(1.0);

        let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, w) in weights.iter().enumerate() {
            if let Some(p) = pattern(w) {
                groups.entry(p).or_default().push(i);
            }
        }
        let expected = 1usize << (level - 1);
        if groups.len() < expected {
            return Err(Error::ThinOrthant {
                level,
                orthant: format!("{} of {} orthants populated", groups.len(), expected),
                count: 0,
            });
        }
        let mut signs = vec![0i8; needed];
        for (orthant, members) in &groups {
            if members.len() < 2 {
                return Err(Error::ThinOrthant {
                    level,
                    orthant: orthant.clone(),
                    count: members.len(),
                });
            }
            for (j, &i) in members.iter().enumerate() {
                signs[i] = if j % 2 == 0 { 1 } else { -1 };
            }
        }

        let mut bumps = Vec::new();
        for (i, orbit) in pool.iter().enumerate() {
            if signs[i] == 0 {
                continue;
            }
            let amp = f64::from(signs[i]) * amplitude / f64::from(orbit.period);
            for p in &orbit_points[i] {
                bumps.push(Bump::new(p.clone(), radius, amp)?);
            }
        }
        disjoint &= supports_disjoint(&bumps);
        if !disjoint {
            return Err(Error::BumpCollision(format!(
                "level {level}: supports of radius {radius} overlap"
            )));
        }
        coordinates.push(CoordinateFunction::bumps(bumps));
        let partial = Cocycle::lipschitz(dim, coordinates.clone())?;
        for (i, orbit) in pool.iter().enumerate() {
            weights[i] = orbit_weight(&partial, a, &orbit.base, orbit.period).padded(level);
        }
        let covered: std::collections::BTreeSet<String> =
            weights.iter().filter_map(|w| pattern(w)).collect();
        let lipschitz = coordinates[level - 1].lipschitz();
        info!(
            "level {level}: amplitude {amplitude:e}, lipschitz {lipschitz:e}, {} orthants",
            covered.len()
        );
        per_level.push(LevelLog {
            level,
            amplitude,
            lipschitz,
            lipschitz_bound: scale,
            signs,
            orthants_covered: covered.len(),
        });
    }

    let f = Cocycle::lipschitz(dim, coordinates)?;
    let log = ConstructionLog {
        params: *params,
        pool,
        min_point_distance,
        radius,
        supports_disjoint: disjoint,
        per_level,
    };
    Ok((f, log))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub level: usize,
    pub orthants_covered: bool,
    pub verdict: Verdict,
    pub lipschitz: f64,
    pub lipschitz_bound: f64,
}

impl LevelCheck {
    pub fn passed(&self) -> bool {
        self.orthants_covered
            && self.verdict == Verdict::Inseparable
            && self.lipschitz <= self.lipschitz_bound
    }
}

/// Re-derives the periodic data of `f` and checks every level 1..=f.len():
/// orthant cover, exact separation verdict, and the Lipschitz schedule.
pub fn check_levels(
    f: &Cocycle,
    a: &ToralAutomorphism,
    n_max: u32,
    budget: u64,
) -> Result<(PeriodicData, Vec<LevelCheck>)> {
    let data = periodic_data(f, a, n_max, budget)?;
    let mut checks = Vec::with_capacity(f.len());
    for level in 1..=f.len() {
        let pts = separation::rationalize(&data.weights_at_level(level));
        let cover = separation::orthant_coverage(&pts)?;
        let cert = separation::decide(&pts)?;
        checks.push(LevelCheck {
            level,
            orthants_covered: cover.covered,
            verdict: cert.verdict,
            lipschitz: f.coordinate(level).lipschitz(),
            lipschitz_bound: 0.5f64.powi(level as i32 - 1),
        });
    }
    Ok((data, checks))
}

/// The separating functional e_{n+1} for the periodic data of π_n∘f, verified
/// exactly; None when coordinate n+1 of f vanishes on every periodic weight.
pub fn truncation_certificate(
    f: &Cocycle,
    a: &ToralAutomorphism,
    n: usize,
    n_max: u32,
    budget: u64,
) -> Result<Option<separation::SeparationCertificate>> {
    let full = periodic_data(f, a, n_max, budget)?;
    if full.entries.iter().all(|e| e.weight.get(n + 1) == 0.0) {
        return Ok(None);
    }
    let truncated = periodic_data(&f.truncate(n), a, n_max, budget)?;
    let pts = separation::rationalize(&truncated.weights_at_level(n + 1));
    let cert = separation::decide(&pts)?;
    let expected: Vec<BigRational> = (0..=n)
        .map(|i| {
            if i == n {
                BigRational::from_integer(1.into())
            } else {
                BigRational::zero()
            }
        })
        .collect();
    if cert.verdict != Verdict::Separable || cert.functional() != Some(&expected[..]) {
        return Err(Error::CertificateRejected(format!(
            "truncation at {n} did not yield e_{}",
            n + 1
        )));
    }
    Ok(Some(cert))
}
