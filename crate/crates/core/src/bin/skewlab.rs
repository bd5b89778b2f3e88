//! Command-line front end for the skew-product pipeline.
//!
//! Every subcommand reads the same JSON config as `run` (or a built-in
//! default), so each number in a full report can be recomputed in isolation.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use serde::Serialize;

use skewlab::cocycle::periodic_data;
use skewlab::experiment::{
    self, build_cocycle, perturb_stage, separation_stage, to_json_bytes, CocycleSource,
    ExperimentConfig,
};
use skewlab::separation;
use skewlab::skew;
use skewlab::torus::{self, ToralAutomorphism};
use skewlab::Error;

#[derive(Parser)]
#[command(
    name = "skewlab",
    version,
    about = "Skew products over hyperbolic toral automorphisms"
)]
struct Cli {
    /// JSON experiment config; a cat-map default is used when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; results go to stdout when omitted
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Integer matrix as JSON, e.g. "[[2,1],[1,1]]"; overrides the config map
    #[arg(long, global = true)]
    matrix: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the map is a hyperbolic automorphism
    ValidateMap,
    /// List every fixed point of A^n as CSV
    PeriodicPoints {
        #[arg(long)]
        n: u32,
    },
    /// Periodic weights of the configured cocycle as CSV
    Weights {
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Decide whether a point set is separable from the origin
    Decide {
        /// JSON array of points; defaults to the configured periodic weights
        #[arg(long)]
        points: Option<PathBuf>,
        /// Level of the periodic weights when no point file is given
        #[arg(long, default_value_t = 1)]
        level: usize,
    },
    /// Build the inseparable cocycle
    Construct {
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Coverage search over the skew product
    Simulate {
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Closing-lemma trials
    Close {
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Truncation perturbations π_n∘f
    Perturb {
        #[arg(long = "n", value_delimiter = ',')]
        levels: Vec<usize>,
    },
    /// Full pipeline
    Run,
}

/// Exit status 1: the input is well formed but mathematically rejected.
/// Exit status 2: the input itself is malformed.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::ParseRational(_)
        | Error::InvalidGrid(_)
        | Error::NotSquare { .. }
        | Error::EmptyMatrix
        | Error::DimensionMismatch { .. }
        | Error::HolderExponent(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn needs_seed(cmd: &Command) -> bool {
    matches!(
        cmd,
        Command::Simulate { .. } | Command::Close { .. } | Command::Run
    )
}

fn load_config(cli: &Cli) -> skewlab::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(vec![e.to_string()]))?
        }
        None => {
            let mut c = ExperimentConfig::example(0);
            c.seed = None;
            c
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    // A config file must carry its own seed; the built-in default only
    // needs one for stochastic stages.
    if cfg.seed.is_none() && cli.config.is_none() && !needs_seed(&cli.command) {
        cfg.seed = Some(0);
    }
    if let Some(m) = &cli.matrix {
        cfg.map = serde_json::from_str(m)
            .map_err(|e| Error::InvalidConfig(vec![format!("--matrix: {e}")]))?;
    }
    match &cli.command {
        Command::Construct { levels, n_max } => {
            if let CocycleSource::Construct {
                levels: l,
                n_max: n,
                ..
            } = &mut cfg.cocycle
            {
                *l = levels.unwrap_or(*l);
                *n = n_max.unwrap_or(*n);
            } else if levels.is_some() || n_max.is_some() {
                return Err(Error::InvalidConfig(vec![
                    "--levels/--n-max need a construct cocycle source".into(),
                ]));
            }
        }
        Command::Weights { n_max: Some(n) } => cfg.periodic.n_max = *n,
        Command::Simulate { steps, starts } => {
            cfg.simulation.steps = steps.unwrap_or(cfg.simulation.steps);
            cfg.simulation.starts = starts.unwrap_or(cfg.simulation.starts);
            cfg.simulation.pilot_steps = cfg.simulation.pilot_steps.min(cfg.simulation.steps);
        }
        Command::Close { trials: Some(t) } => cfg.closing.trials = *t,
        Command::Perturb { levels } if !levels.is_empty() => cfg.perturb.levels = levels.clone(),
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Writes `bytes` to `<output>/<name>` or to stdout.
fn emit(output: Option<&Path>, name: &str, bytes: &[u8]) -> skewlab::Result<()> {
    match output {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, bytes)?;
            info!("wrote {}", path.display());
        }
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(output: Option<&Path>, name: &str, v: &T) -> skewlab::Result<()> {
    emit(output, name, &to_json_bytes(v)?)
}

fn dispatch(cli: &Cli) -> skewlab::Result<()> {
    let cfg = load_config(cli)?;
    let out = cli.output.as_deref().or(cfg.output.dir.as_deref());
    let map = || ToralAutomorphism::with_tolerance(cfg.map.clone(), cfg.hyperbolicity_tol);

    match &cli.command {
        Command::ValidateMap => {
            let a = map()?;
            emit_json(out, "map.json", a.report())
        }
        Command::PeriodicPoints { n } => {
            let a = map()?;
            let set = torus::periodic_points_with_budget(&a, *n, cfg.periodic.budget)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["index".to_string()];
            header.extend((1..=a.dim()).map(|i| format!("x{i}")));
            header.push("period".into());
            w.write_record(&header)?;
            let mut index = 0usize;
            for orbit in &set.orbits {
                for p in orbit.points(&a) {
                    let mut row = vec![index.to_string()];
                    row.extend(p.to_strings());
                    row.push(orbit.period.to_string());
                    w.write_record(&row)?;
                    index += 1;
                }
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            emit(out, "periodic_points.csv", &bytes)
        }
        Command::Weights { .. } => {
            let a = map()?;
            let (f, _) = build_cocycle(&cfg, &a)?;
            let data = periodic_data(&f, &a, cfg.periodic.n_max, cfg.periodic.budget)?;
            let mut buf = Vec::new();
            data.write_csv(&mut buf, a.dim())?;
            emit(out, "periodic.csv", &buf)
        }
        Command::Decide { points, level } => {
            let cert = match points {
                Some(path) => {
                    let pts: Vec<Vec<f64>> = serde_json::from_str(&fs::read_to_string(path)?)?;
                    separation::decide_f64(&pts)?
                }
                None => {
                    let a = map()?;
                    let (f, _) = build_cocycle(&cfg, &a)?;
                    let data = periodic_data(&f, &a, cfg.periodic.n_max, cfg.periodic.budget)?;
                    separation_stage(&data, *level)?
                        .pop()
                        .expect("at least one level")
                        .certificate
                }
            };
            emit_json(out, "certificate.json", &cert)
        }
        Command::Construct { .. } => {
            let a = map()?;
            let (f, log) = build_cocycle(&cfg, &a)?;
            emit_json(out, "cocycle.json", &f)?;
            if let (Some(dir), Some(log)) = (out, log) {
                emit_json(Some(dir), "construction.json", &log)?;
            }
            Ok(())
        }
        Command::Simulate { .. } => {
            let a = map()?;
            let (f, _) = build_cocycle(&cfg, &a)?;
            let result = skew::transitive_point_search(&a, &f, &cfg.search_spec())?;
            emit_json(out, "coverage.json", &result)?;
            if let (Some(dir), Some(r)) = (out, result.reports.first()) {
                let mut buf = Vec::new();
                r.write_curve_csv(&mut buf)?;
                emit(Some(dir), "coverage_curve.csv", &buf)?;
            }
            Ok(())
        }
        Command::Close { .. } => {
            let a = map()?;
            let f = match build_cocycle(&cfg, &a) {
                Ok((f, _)) => Some(f),
                Err(e) => {
                    log::warn!("cocycle unavailable, weight closeness skipped: {e}");
                    None
                }
            };
            let summary = skewlab::closing::run_trials(&a, f.as_ref(), &cfg.trial_spec())?;
            if let Some(dir) = out {
                let mut buf = Vec::new();
                summary.write_csv(&mut buf)?;
                emit(Some(dir), "closing_trials.csv", &buf)?;
            }
            emit_json(out, "closing.json", &summary)
        }
        Command::Perturb { .. } => {
            let a = map()?;
            let (f, _) = build_cocycle(&cfg, &a)?;
            let (verdicts, distances) = perturb_stage(&cfg, &a, &f)?;
            emit_json(
                out,
                "perturb.json",
                &serde_json::json!({ "exact": verdicts, "sampled": distances }),
            )
        }
        Command::Run => {
            let result = experiment::run(&cfg)?;
            match out {
                Some(dir) => {
                    for path in result.write(dir, cfg.map.len())? {
                        info!("wrote {}", path.display());
                    }
                }
                None => emit_json(None, "report.json", &result.report)?,
            }
            // A failed map stage is a domain rejection even though the run completed.
            if let Some(msg) = result.report.stage_errors.get("map") {
                eprintln!("map rejected: {msg}");
                return map().map(|_| ());
            }
            Ok(())
        }
    }
}
