//! Config-driven pipeline: map validation, cocycle, periodic data, separation
//! verdicts, truncation perturbations, skew-product diagnostics and closing
//! trials, collected in one deterministic report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::closing::{self, ClosingConstants, TrialSpec};
use crate::cocycle::{
    holder_distance, periodic_data, sup_distance, Cocycle, DistanceBounds, PairSample,
    PeriodicData, SampleGrid, DEFAULT_ENUMERATION_BUDGET,
};
use crate::construction::{self, ConstructionLog, ConstructionParams};
use crate::error::{Error, Result};
use crate::separation::{self, SeparationCertificate};
use crate::skew::{self, GridSpec, SearchResult, SearchSpec, WeakMixingReport};
use crate::torus::{HyperbolicityReport, ToralAutomorphism, DEFAULT_HYPERBOLICITY_TOL};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum CocycleSource {
    Construct {
        levels: usize,
        n_max: u32,
        #[serde(default = "default_radius_fraction")]
        radius_fraction: f64,
        #[serde(default = "default_gain")]
        gain: f64,
    },
    File {
        path: PathBuf,
    },
    Inline {
        cocycle: Cocycle,
    },
    Zero,
}

fn default_radius_fraction() -> f64 {
    1.0 / 3.0
}

fn default_gain() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodicSpec {
    pub n_max: u32,
    pub budget: u64,
}

impl Default for PeriodicSpec {
    fn default() -> Self {
        Self {
            n_max: 5,
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSpec {
    pub enabled: bool,
    pub starts: usize,
    pub pilot_steps: u64,
    pub steps: u64,
    /// Product-system diagnostic; skipped when absent.
    pub weak_mixing: Option<WeakMixingSpec>,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            enabled: true,
            starts: 8,
            pilot_steps: 100_000,
            steps: 1_000_000,
            weak_mixing: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakMixingSpec {
    pub grid: GridSpec,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosingSpec {
    pub enabled: bool,
    pub trials: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    pub n_max: u32,
    pub c_max: f64,
    pub max_samples: usize,
}

impl Default for ClosingSpec {
    fn default() -> Self {
        let t = TrialSpec::default();
        Self {
            enabled: true,
            trials: t.trials,
            eps_min: t.eps_min,
            eps_max: t.eps_max,
            n_max: t.n_max,
            c_max: t.c_max,
            max_samples: t.max_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbSpec {
    /// Truncation levels n; each yields π_n∘f.
    pub levels: Vec<usize>,
    pub sample_per_axis: usize,
    pub holder_exponent: f64,
}

impl Default for PerturbSpec {
    fn default() -> Self {
        Self {
            levels: vec![1, 2],
            sample_per_axis: 8,
            holder_exponent: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Mandatory; kept optional here so that a missing seed is reported
    /// alongside every other schema violation.
    pub seed: Option<u64>,
    pub map: Vec<Vec<i64>>,
    #[serde(default = "default_tol")]
    pub hyperbolicity_tol: f64,
    pub cocycle: CocycleSource,
    #[serde(default)]
    pub periodic: PeriodicSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub simulation: SimulationSpec,
    #[serde(default)]
    pub closing: ClosingSpec,
    #[serde(default)]
    pub perturb: PerturbSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_tol() -> f64 {
    DEFAULT_HYPERBOLICITY_TOL
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// The cat map with a three-level construction and default budgets.
    pub fn example(seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: Some(seed),
            map: vec![vec![2, 1], vec![1, 1]],
            hyperbolicity_tol: DEFAULT_HYPERBOLICITY_TOL,
            cocycle: CocycleSource::Construct {
                levels: 3,
                n_max: 4,
                radius_fraction: default_radius_fraction(),
                gain: default_gain(),
            },
            periodic: PeriodicSpec::default(),
            grid: GridSpec::default(),
            simulation: SimulationSpec::default(),
            closing: ClosingSpec::default(),
            perturb: PerturbSpec::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated config carries a seed")
    }

    /// Lists every schema violation at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            errs.push(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.seed.is_none() {
            errs.push("seed is mandatory (set it in the config or pass --seed)".into());
        }
        if self.map.is_empty() {
            errs.push("map must be a non-empty square integer matrix".into());
        }
        if self.hyperbolicity_tol.is_nan() || self.hyperbolicity_tol < 0.0 {
            errs.push("hyperbolicity_tol must be non-negative".into());
        }
        if self.periodic.n_max == 0 || self.periodic.budget == 0 {
            errs.push("periodic.n_max and periodic.budget must be positive".into());
        }
        if let CocycleSource::Construct { levels, n_max, .. } = &self.cocycle {
            if *levels == 0 || *n_max == 0 {
                errs.push("cocycle.levels and cocycle.n_max must be positive".into());
            }
        }
        if let Err(e) = self.grid.validate(self.map.len().max(1)) {
            errs.push(e.to_string());
        }
        let s = &self.simulation;
        if s.enabled && (s.starts == 0 || s.pilot_steps == 0 || s.steps == 0) {
            errs.push("simulation.starts, pilot_steps and steps must be positive".into());
        }
        if s.steps >= u64::from(u32::MAX) {
            errs.push(format!("simulation.steps must be below {}", u32::MAX));
        }
        if let Some(w) = &s.weak_mixing {
            if w.steps == 0 {
                errs.push("simulation.weak_mixing.steps must be positive".into());
            }
        }
        let c = &self.closing;
        if c.enabled {
            if c.trials == 0 || c.n_max == 0 || c.max_samples == 0 {
                errs.push("closing.trials, n_max and max_samples must be positive".into());
            }
            if !(c.eps_min > 0.0 && c.eps_min < c.eps_max) {
                errs.push("closing needs 0 < eps_min < eps_max".into());
            }
            if c.c_max.is_nan() || c.c_max <= 0.0 {
                errs.push("closing.c_max must be positive".into());
            }
        }
        if self.perturb.sample_per_axis == 0 {
            errs.push("perturb.sample_per_axis must be positive".into());
        }
        let alpha = self.perturb.holder_exponent;
        if !(alpha > 0.0 && alpha <= 1.0) {
            errs.push(format!("perturb.holder_exponent {alpha} outside (0, 1]"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errs))
        }
    }

    pub fn construction_params(&self) -> Option<ConstructionParams> {
        match &self.cocycle {
            CocycleSource::Construct {
                levels,
                n_max,
                radius_fraction,
                gain,
            } => Some(ConstructionParams {
                levels: *levels,
                n_max: *n_max,
                budget: self.periodic.budget,
                radius_fraction: *radius_fraction,
                gain: *gain,
            }),
            _ => None,
        }
    }

    pub fn search_spec(&self) -> SearchSpec {
        SearchSpec {
            grids: vec![self.grid],
            starts: self.simulation.starts,
            pilot_steps: self.simulation.pilot_steps,
            budget: self.simulation.steps,
            seed: stage_seed(self.seed(), Stage::Simulation),
        }
    }

    pub fn trial_spec(&self) -> TrialSpec {
        let c = &self.closing;
        TrialSpec {
            trials: c.trials,
            eps_min: c.eps_min,
            eps_max: c.eps_max,
            n_max: c.n_max,
            c_max: c.c_max,
            seed: stage_seed(self.seed(), Stage::Closing),
            max_samples: c.max_samples,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Stage {
    Simulation,
    WeakMixing,
    Closing,
}

/// Independent, reproducible seed per stage.
pub fn stage_seed(seed: u64, stage: Stage) -> u64 {
    let salt: u64 = match stage {
        Stage::Simulation => 0x5349_4d55,
        Stage::WeakMixing => 0x574d_4958,
        Stage::Closing => 0x434c_4f53,
    };
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt
}

pub fn build_cocycle(
    cfg: &ExperimentConfig,
    a: &ToralAutomorphism,
) -> Result<(Cocycle, Option<ConstructionLog>)> {
    match &cfg.cocycle {
        CocycleSource::Construct { .. } => {
            let params = cfg.construction_params().expect("construct source");
            let (f, log) = construction::construct_with(a, &params)?;
            Ok((f, Some(log)))
        }
        CocycleSource::File { path } => {
            let f: Cocycle = serde_json::from_str(&fs::read_to_string(path)?)?;
            Ok((f, None))
        }
        CocycleSource::Inline { cocycle } => Ok((cocycle.clone(), None)),
        CocycleSource::Zero => Ok((Cocycle::zero(a.dim()), None)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CocycleSummary {
    pub coordinates: usize,
    pub lipschitz_constants: Vec<f64>,
    pub euclidean_lipschitz: f64,
    pub construction: Option<ConstructionLog>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicSummary {
    pub n_max: u32,
    pub orbits: usize,
    pub orbits_by_period: BTreeMap<u32, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelVerdict {
    pub level: usize,
    pub orthants_covered: bool,
    pub certificate: SeparationCertificate,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationVerdict {
    pub n: usize,
    /// None when coordinate n+1 vanishes on all periodic data.
    pub certificate: Option<SeparationCertificate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationDistances {
    pub n: usize,
    pub sup: DistanceBounds,
    pub holder_exponent: f64,
    pub holder: DistanceBounds,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosingStats {
    pub trials: usize,
    pub samples_drawn: usize,
    pub fitted: ClosingConstants,
    pub c_max: f64,
    pub all_within_c_max: bool,
    pub lipschitz: Option<f64>,
    pub closeness_violations: Option<usize>,
}

/// Claims proved in exact arithmetic or by analytic bounds.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ExactSection {
    pub map: Option<HyperbolicityReport>,
    pub cocycle: Option<CocycleSummary>,
    pub periodic: Option<PeriodicSummary>,
    pub separation: Vec<LevelVerdict>,
    pub truncations: Vec<TruncationVerdict>,
    /// Every closing point satisfies A^n p = p, checked exactly.
    pub closing_points_periodic: Option<bool>,
}

/// Sampled lower bounds paired with certified upper bounds.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SampledSection {
    pub truncation_distances: Vec<TruncationDistances>,
}

/// Simulation evidence; never a proof.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StatisticalSection {
    pub coverage: Option<SearchResult>,
    pub weak_mixing: Option<WeakMixingReport>,
    pub closing: Option<ClosingStats>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub exact: ExactSection,
    pub sampled: SampledSection,
    pub statistical: StatisticalSection,
    /// Stage name to failure message; later independent stages still run.
    pub stage_errors: BTreeMap<String, String>,
}

/// Timing data, kept out of the report so the report is reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub stage_seconds: BTreeMap<String, f64>,
}

/// Everything `run` produced, including data written to side files.
pub struct RunOutput {
    pub report: Report,
    pub metadata: Metadata,
    pub cocycle: Option<Cocycle>,
    pub periodic: Option<PeriodicData>,
    pub closing: Option<closing::TrialSummary>,
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis())
}

struct Stages {
    errors: BTreeMap<String, String>,
    seconds: BTreeMap<String, f64>,
}

impl Stages {
    fn run<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Option<T> {
        let t = Instant::now();
        let out = f();
        self.seconds.insert(name.into(), t.elapsed().as_secs_f64());
        match out {
            Ok(v) => Some(v),
            Err(e) => {
                warn!("stage {name} failed: {e}");
                self.errors.insert(name.into(), e.to_string());
                None
            }
        }
    }

    fn skip(&mut self, name: &str, because: &str) {
        self.errors
            .insert(name.into(), format!("skipped: {because} unavailable"));
    }
}

/// Exact verdict for the periodic weights at every level 1..=levels.
pub fn separation_stage(data: &PeriodicData, levels: usize) -> Result<Vec<LevelVerdict>> {
    (1..=levels.max(1))
        .map(|level| {
            let pts = separation::rationalize(&data.weights_at_level(level));
            let cover = separation::orthant_coverage(&pts)?;
            Ok(LevelVerdict {
                level,
                orthants_covered: cover.covered,
                certificate: separation::decide(&pts)?,
            })
        })
        .collect()
}

/// Certificate and distance bounds for each truncation π_n∘f in the config.
pub fn perturb_stage(
    cfg: &ExperimentConfig,
    a: &ToralAutomorphism,
    f: &Cocycle,
) -> Result<(Vec<TruncationVerdict>, Vec<TruncationDistances>)> {
    let grid = SampleGrid {
        per_axis: cfg.perturb.sample_per_axis,
    };
    let pairs = PairSample {
        grid,
        ..PairSample::default()
    };
    let mut verdicts = Vec::new();
    let mut distances = Vec::new();
    for &n in &cfg.perturb.levels {
        let g = f.truncate(n);
        verdicts.push(TruncationVerdict {
            n,
            certificate: construction::truncation_certificate(
                f,
                a,
                n,
                cfg.periodic.n_max,
                cfg.periodic.budget,
            )?,
        });
        distances.push(TruncationDistances {
            n,
            sup: sup_distance(f, &g, &grid)?,
            holder_exponent: cfg.perturb.holder_exponent,
            holder: holder_distance(f, &g, cfg.perturb.holder_exponent, &pairs)?,
            tail_bound: crate::sequence::truncation_bound(n),
        });
    }
    Ok((verdicts, distances))
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let started = unix_ms();
    let seed = cfg.seed();
    let mut st = Stages {
        errors: BTreeMap::new(),
        seconds: BTreeMap::new(),
    };
    let mut exact = ExactSection::default();
    let mut sampled = SampledSection::default();
    let mut statistical = StatisticalSection::default();

    let map = st.run("map", || {
        ToralAutomorphism::with_tolerance(cfg.map.clone(), cfg.hyperbolicity_tol)
    });
    exact.map = map.as_ref().map(|a| a.report().clone());

    let built = match &map {
        Some(a) => st.run("cocycle", || build_cocycle(cfg, a)),
        None => {
            st.skip("cocycle", "map");
            None
        }
    };
    let cocycle = built.as_ref().map(|(f, _)| f.clone());
    if let Some((f, log)) = &built {
        exact.cocycle = Some(CocycleSummary {
            coordinates: f.len(),
            lipschitz_constants: f.lipschitz_constants(),
            euclidean_lipschitz: f.euclidean_lipschitz(),
            construction: log.clone(),
        });
    }

    let periodic = match (&map, &cocycle) {
        (Some(a), Some(f)) => st.run("periodic", || {
            periodic_data(f, a, cfg.periodic.n_max, cfg.periodic.budget)
        }),
        _ => {
            st.skip("periodic", "map or cocycle");
            None
        }
    };
    if let Some(data) = &periodic {
        let mut by_period = BTreeMap::new();
        for e in &data.entries {
            *by_period.entry(e.orbit.period).or_insert(0) += 1;
        }
        exact.periodic = Some(PeriodicSummary {
            n_max: cfg.periodic.n_max,
            orbits: data.len(),
            orbits_by_period: by_period,
        });
    }

    if let (Some(data), Some(f)) = (&periodic, &cocycle) {
        let verdicts = st.run("separation", || separation_stage(data, f.len()));
        exact.separation = verdicts.unwrap_or_default();
    } else {
        st.skip("separation", "periodic data");
    }

    if let (Some(a), Some(f)) = (&map, &cocycle) {
        let out = st.run("perturb", || perturb_stage(cfg, a, f));
        if let Some((v, d)) = out {
            exact.truncations = v;
            sampled.truncation_distances = d;
        }
    } else {
        st.skip("perturb", "map or cocycle");
    }

    if cfg.simulation.enabled {
        if let (Some(a), Some(f)) = (&map, &cocycle) {
            statistical.coverage = st.run("simulation", || {
                skew::transitive_point_search(a, f, &cfg.search_spec())
            });
            if let Some(w) = &cfg.simulation.weak_mixing {
                statistical.weak_mixing = st.run("weak_mixing", || {
                    skew::weak_mixing_diagnostic(
                        a,
                        f,
                        w.grid,
                        w.steps,
                        stage_seed(seed, Stage::WeakMixing),
                    )
                });
            }
        } else {
            st.skip("simulation", "map or cocycle");
        }
    }

    let mut closing_summary = None;
    if cfg.closing.enabled {
        if let Some(a) = &map {
            closing_summary = st.run("closing", || {
                closing::run_trials(a, cocycle.as_ref(), &cfg.trial_spec())
            });
            if let Some(s) = &closing_summary {
                exact.closing_points_periodic = Some(s.all_periodic);
                statistical.closing = Some(ClosingStats {
                    trials: s.trials.len(),
                    samples_drawn: s.samples_drawn,
                    fitted: s.fitted,
                    c_max: cfg.closing.c_max,
                    all_within_c_max: s.all_within_c_max,
                    lipschitz: s.lipschitz,
                    closeness_violations: s.closeness_violations,
                });
            }
        } else {
            st.skip("closing", "map");
        }
    }

    info!("run finished with {} stage error(s)", st.errors.len());
    Ok(RunOutput {
        report: Report {
            schema_version: SCHEMA_VERSION,
            seed,
            exact,
            sampled,
            statistical,
            stage_errors: st.errors,
        },
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION").into(),
            started_unix_ms: started,
            finished_unix_ms: unix_ms(),
            stage_seconds: st.seconds,
        },
        cocycle,
        periodic,
        closing: closing_summary,
    })
}

impl RunOutput {
    /// report.json, metadata.json, cocycle.json, periodic.csv,
    /// closing_trials.csv and coverage_curve.csv, as available.
    pub fn write(&self, dir: &Path, dim: usize) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, bytes)?;
            written.push(path);
            Ok(())
        };
        put("report.json", to_json_bytes(&self.report)?)?;
        put("metadata.json", to_json_bytes(&self.metadata)?)?;
        if let Some(f) = &self.cocycle {
            put("cocycle.json", to_json_bytes(f)?)?;
        }
        if let Some(p) = &self.periodic {
            let mut buf = Vec::new();
            p.write_csv(&mut buf, dim)?;
            put("periodic.csv", buf)?;
        }
        if let Some(c) = &self.closing {
            let mut buf = Vec::new();
            c.write_csv(&mut buf)?;
            put("closing_trials.csv", buf)?;
        }
        if let Some(r) = self
            .report
            .statistical
            .coverage
            .as_ref()
            .and_then(|s| s.reports.first())
        {
            let mut buf = Vec::new();
            r.write_curve_csv(&mut buf)?;
            put("coverage_curve.csv", buf)?;
        }
        Ok(written)
    }
}

pub fn to_json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::example(seed);
        cfg.grid = GridSpec {
            level: 2,
            half_width: 1.0,
            base_subdivisions: 4,
            fiber_subdivisions: 4,
        };
        cfg.simulation.starts = 2;
        cfg.simulation.pilot_steps = 500;
        cfg.simulation.steps = 2000;
        cfg.closing.trials = 5;
        cfg
    }

    #[test]
    fn missing_seed_and_bad_values_are_listed() {
        let text = r#"{"schema_version": 2, "map": [[2,1],[1,1]], "cocycle": {"source": "zero"},
                       "closing": {"eps_min": 0.1, "eps_max": 0.01}}"#;
        let Err(Error::InvalidConfig(errs)) = ExperimentConfig::from_json(text) else {
            panic!("expected invalid config");
        };
        assert!(errs.iter().any(|e| e.contains("seed")));
        assert!(errs.iter().any(|e| e.contains("schema_version")));
        assert!(errs.iter().any(|e| e.contains("eps_min")));
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{"schema_version": 1, "seed": 1, "map": [[2,1],[1,1]],
                       "cocycle": {"source": "zero"}, "bogus": 3}"#;
        assert!(matches!(
            ExperimentConfig::from_json(text),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn config_round_trips() {
        let cfg = ExperimentConfig::example(9);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn constructed_run_is_inseparable_and_deterministic() {
        let cfg = quick(11);
        let a = run(&cfg).unwrap();
        assert!(
            a.report.stage_errors.is_empty(),
            "{:?}",
            a.report.stage_errors
        );
        assert_eq!(a.report.exact.separation.len(), 3);
        for v in &a.report.exact.separation {
            assert_eq!(v.certificate.verdict, separation::Verdict::Inseparable);
        }
        let b = run(&cfg).unwrap();
        assert_eq!(
            to_json_bytes(&a.report).unwrap(),
            to_json_bytes(&b.report).unwrap()
        );
    }

    #[test]
    fn zero_cocycle_is_separable() {
        let mut cfg = quick(1);
        cfg.cocycle = CocycleSource::Zero;
        cfg.simulation.enabled = false;
        cfg.closing.enabled = false;
        let out = run(&cfg).unwrap();
        let v = &out.report.exact.separation[0];
        assert_eq!(v.certificate.verdict, separation::Verdict::Separable);
    }

    #[test]
    fn bad_map_recorded_and_dependents_skipped() {
        let mut cfg = quick(1);
        cfg.map = vec![vec![1, 0], vec![0, 1]];
        let out = run(&cfg).unwrap();
        let errs = &out.report.stage_errors;
        assert!(errs["map"].contains("eigenvalue"));
        assert!(errs["cocycle"].starts_with("skipped"));
        assert!(out.report.exact.map.is_none());
    }
}
