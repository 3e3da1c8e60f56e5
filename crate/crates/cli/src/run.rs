//! Executes a [`RunConfig`] and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use qdyn_core::dynamics::bloch_maps;
use qdyn_core::nonmarkov::{analyze, blp_measure, cp_divisibility_scan, rate_sign_divisibility, StGrid};
use qdyn_core::qubit::{fidelity_with_pure, trace_distance};
use qdyn_core::{
    bloch_from_angles, initial_speed_scan, initial_speed_squared_closed_form, ode_oracle_trajectory,
    AffineBlochMap, BlochVector, MonotonicityReport, NonMarkovReport, PureStateAngles, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};

/// Printed at the top of every report.
pub const CONVENTION: &str = "dimensionless units: rates and frequencies are ratios to the model's reference \
frequency (ohmic: omega_c; polarization: delta_n * max(sigma, omega1, omega2); jaynes_cummings: lambda; \
pauli_tanh, pauli_tan: max(lambda, omega)) and times are in units of its inverse";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{module}: {source}")]
    Compute {
        module: &'static str,
        #[source]
        source: qdyn_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
}

fn in_module(module: &'static str) -> impl Fn(qdyn_core::Error) -> RunError {
    move |source| RunError::Compute { module, source }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallCheck {
    pub seed: u64,
    pub samples: usize,
    pub maps: usize,
    /// Largest `|Λ(n)| − 1` seen over all samples and maps.
    pub worst_excess: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleCheck {
    pub ode_tol: f64,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedWarning {
    pub t: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub v0_squared: f64,
    pub blp: Option<f64>,
    pub indivisible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub convention: &'static str,
    pub config: RunConfig,
    pub ball_check: BallCheck,
    pub nonmarkov: Option<NonMarkovReport>,
    pub monotonicity: Option<MonotonicityReport>,
    pub oracle: Option<OracleCheck>,
    pub speed_warnings: Vec<SpeedWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub report: Option<RunReport>,
    pub sweep: Vec<SweepRow>,
}

/// Worker count: `jobs` if given, else `QDYN_JOBS`, else one per core.
pub fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, RunError> {
    let jobs = jobs.or_else(|| std::env::var("QDYN_JOBS").ok().and_then(|v| v.parse().ok())).unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))
}

/// Writes `trajectory.csv` always; `speed.csv` when speed is requested,
/// `sweep.csv` when a sweep is configured and `report.json` whenever
/// anything beyond the trajectory was asked for.
pub fn run(config: &RunConfig, pool: &rayon::ThreadPool) -> Result<RunOutput, RunError> {
    config.validate()?;
    let model = &config.model;
    let init = config.initial_state;
    let angles = PureStateAngles::new(init.theta, init.phi).map_err(in_module("qubit"))?;
    let n0 = bloch_from_angles(angles).map_err(in_module("qubit"))?;
    let grid = TimeGrid::new(config.time.t0, config.t1(), config.time.points).map_err(in_module("dynamics"))?;
    let times = grid.times();
    let maps = bloch_maps(model, &times).map_err(in_module("dynamics"))?;
    let states: Vec<BlochVector> = maps.iter().map(|m| m.apply(&n0)).collect();

    fs::create_dir_all(&config.output_dir).map_err(|source| RunError::Io { path: config.output_dir.clone(), source })?;
    let mut files = Vec::new();

    let pairs = config
        .pairs
        .iter()
        .map(|q| Ok((bloch_from_angles(PureStateAngles::new(q[0], q[1])?)?, bloch_from_angles(PureStateAngles::new(q[2], q[3])?)?)))
        .collect::<qdyn_core::Result<Vec<_>>>()
        .map_err(in_module("qubit"))?;
    let mut header = vec!["t".to_string(), "x".into(), "y".into(), "z".into(), "fidelity".into()];
    header.extend((1..=pairs.len()).map(|k| format!("d_{k}")));
    let mut rows = Vec::with_capacity(times.len());
    for ((t, n), m) in times.iter().zip(&states).zip(&maps) {
        let mut row = vec![num(*t), num(n.x), num(n.y), num(n.z)];
        row.push(num(fidelity_with_pure(n0, *n).map_err(in_module("qubit"))?));
        for (a, b) in &pairs {
            row.push(num(trace_distance(m.apply(a), m.apply(b)).map_err(in_module("qubit"))?));
        }
        rows.push(row);
    }
    files.push(write_csv(&config.output_dir, "trajectory.csv", &header, &rows)?);

    let mut speed_warnings = Vec::new();
    if config.analysis.speed {
        let curve = pool
            .install(|| {
                times
                    .par_iter()
                    .map(|&t| qdyn_core::speed_squared_fd(model, angles, t, config.tolerances.h))
                    .collect::<qdyn_core::Result<Vec<_>>>()
            })
            .map_err(in_module("speed"))?;
        let rows: Vec<Vec<String>> = curve.iter().map(|s| vec![num(s.sample.t), num(s.sample.v_squared)]).collect();
        speed_warnings = curve
            .iter()
            .filter_map(|s| s.warning.as_ref().map(|w| SpeedWarning { t: s.sample.t, message: w.clone() }))
            .collect();
        files.push(write_csv(&config.output_dir, "speed.csv", &["t".into(), "g".into()], &rows)?);
    }

    let mut sweep = Vec::new();
    let mut monotonicity = None;
    if let (Some(s), Some(p)) = (&config.sweep, config.sweep_parameter()) {
        let values = s.range().values();
        let horizon = config.horizon();
        let st = StGrid::new(horizon, config.diagnostics.st_points).map_err(in_module("nonmarkov"))?;
        let rate_grid =
            TimeGrid::new(0.0, horizon, config.diagnostics.pair_search.time_points).map_err(in_module("nonmarkov"))?;
        sweep = pool.install(|| {
            values
                .par_iter()
                .map(|&value| -> Result<SweepRow, RunError> {
                    let m = model.with_parameter(&p, value).map_err(in_module("channel"))?;
                    let v0_squared = initial_speed_squared_closed_form(&m, init.theta).map_err(in_module("speed"))?;
                    let blp = if config.analysis.blp {
                        let r = blp_measure(&m, horizon, config.diagnostics.pair_search).map_err(in_module("nonmarkov"))?;
                        Some(r.measure)
                    } else {
                        None
                    };
                    let indivisible = if config.analysis.divisibility {
                        // a negative rate is a witness the Choi grid may be too coarse to see
                        let rates = rate_sign_divisibility(&m, rate_grid).map_err(in_module("nonmarkov"))?;
                        let found = rates.divisibility.is_indivisible()
                            || cp_divisibility_scan(&m, st).map_err(in_module("nonmarkov"))?.divisibility.is_indivisible();
                        Some(found)
                    } else {
                        None
                    };
                    Ok(SweepRow { value, v0_squared, blp, indivisible })
                })
                .collect::<Result<Vec<_>, _>>()
        })?;
        let rows: Vec<Vec<String>> = sweep
            .iter()
            .map(|r| {
                vec![
                    num(r.value),
                    num(r.v0_squared),
                    r.blp.map(num).unwrap_or_default(),
                    r.indivisible.map(|b| b.to_string()).unwrap_or_default(),
                ]
            })
            .collect();
        let header = [p.clone(), "v0_squared".into(), "blp".into(), "indivisible".into()];
        files.push(write_csv(&config.output_dir, "sweep.csv", &header, &rows)?);
        if p == model.driving_parameter() {
            monotonicity = Some(initial_speed_scan(model, &p, s.range(), init.theta).map_err(in_module("speed"))?);
        }
    }

    if !config.analysis.any() && config.sweep.is_none() {
        return Ok(RunOutput { files, report: None, sweep });
    }

    let nonmarkov = if config.analysis.blp || config.analysis.divisibility {
        let st = StGrid::new(config.horizon(), config.diagnostics.st_points).map_err(in_module("nonmarkov"))?;
        Some(analyze(model, config.horizon(), config.diagnostics.pair_search, st).map_err(in_module("nonmarkov"))?)
    } else {
        None
    };
    let oracle = if config.analysis.oracle {
        let ode = ode_oracle_trajectory(model, n0, grid, config.tolerances.ode_tol).map_err(in_module("dynamics"))?;
        let max_error = ode
            .states
            .iter()
            .zip(&states)
            .map(|(a, b)| (a.to_vector() - b.to_vector()).norm())
            .fold(0.0, f64::max);
        Some(OracleCheck { ode_tol: config.tolerances.ode_tol, max_error })
    } else {
        None
    };
    let report = RunReport {
        convention: CONVENTION,
        config: config.clone(),
        ball_check: ball_check(&maps, config.seed, config.ball_samples, config.tolerances.ball),
        nonmarkov,
        monotonicity,
        oracle,
        speed_warnings,
    };
    files.push(write_json(&config.output_dir, "report.json", &report)?);
    Ok(RunOutput { files, report: Some(report), sweep })
}

/// Pushes seeded uniform samples of the Bloch ball through every map.
pub fn ball_check(maps: &[AffineBlochMap], seed: u64, samples: usize, tol: f64) -> BallCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples);
    while points.len() < samples {
        let v: [f64; 3] = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        if let Ok(n) = BlochVector::new(v[0], v[1], v[2]) {
            points.push(n);
        }
    }
    let worst_excess = maps
        .iter()
        .flat_map(|m| points.iter().map(move |n| m.apply(n).norm() - 1.0))
        .fold(f64::NEG_INFINITY, f64::max);
    BallCheck { seed, samples, maps: maps.len(), worst_excess, passed: worst_excess <= tol }
}

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(dir: &Path, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<PathBuf, RunError> {
    let path = dir.join(name);
    let io = |source| RunError::Io { path: path.clone(), source };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| std::io::Error::other(e.to_string());
    w.write_record(header).map_err(csv_err).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(csv_err).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string())).map_err(io)?;
    fs::write(&path, bytes).map_err(io)?;
    Ok(path)
}

pub(crate) fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, RunError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::Io {
        path: path.clone(),
        source: std::io::Error::other(e.to_string()),
    })?;
    text.push('\n');
    fs::write(&path, text).map_err(|source| RunError::Io { path: path.clone(), source })?;
    Ok(path)
}
