//! Hill-climbing search for measurement sets with small `α*`.
//!
//! The family is invariant under simultaneous rotations about the z-axis, so
//! the first direction of every candidate set is kept in the xz-plane.

use std::cmp::Ordering;
use std::path::PathBuf;

use log::{info, warn};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SteerError};
use crate::feasibility::solver::ConicSolver;
use crate::feasibility::{max_alpha, MAX_STRATEGY_BITS};
use crate::pauli::BlochVector;
use crate::rng::{stream_id, stream_rng, uniform_direction};
use crate::state::MeasurementSet;

/// Smallest decrease of `α*` a move must achieve to be accepted.
pub const ACCEPT_TOL: f64 = 1e-7;

/// Published thresholds for m = 2…14, used only for delta reporting.
pub const TABLE_ONE: [(usize, f64); 13] = [
    (2, 0.6951),
    (3, 0.5661),
    (4, 0.5424),
    (5, 0.5302),
    (6, 0.5156),
    (7, 0.5120),
    (8, 0.5088),
    (9, 0.5037),
    (10, 0.5030),
    (11, 0.5014),
    (12, 0.5005),
    (13, 0.4993),
    (14, 0.4983),
];

pub fn table_one_value(m: usize) -> Option<f64> {
    TABLE_ONE.iter().find(|(k, _)| *k == m).map(|&(_, v)| v)
}

const HILL_STREAM: u32 = 1;
const REFINE_STREAM: u32 = 2;
const CAMPAIGN_STREAM: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub m: usize,
    pub restarts: usize,
    /// Radians.
    pub initial_step: f64,
    pub decay: f64,
    pub min_step: f64,
    /// Random tangent steps tried per direction in one sweep.
    pub proposals: usize,
    pub seed: u64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    /// Per-restart cap on `max_alpha` evaluations.
    pub max_evaluations: Option<u64>,
}

impl SearchConfig {
    pub fn new(m: usize, seed: u64) -> Self {
        SearchConfig {
            m,
            restarts: 20,
            initial_step: 0.3,
            decay: 0.7,
            min_step: 1e-4,
            proposals: 4,
            seed,
            threads: None,
            max_evaluations: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > MAX_STRATEGY_BITS {
            return Err(SteerError::domain(format!("m must lie in 1..={MAX_STRATEGY_BITS}, got {}", self.m)));
        }
        if self.proposals == 0 {
            return Err(SteerError::domain("proposals must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(SteerError::domain("restarts must be at least 1"));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(SteerError::domain(format!("decay must lie in (0, 1), got {}", self.decay)));
        }
        if !(self.min_step > 0.0) {
            return Err(SteerError::domain(format!("minimum step must be positive, got {}", self.min_step)));
        }
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return Err(SteerError::domain(format!("initial step must be positive, got {}", self.initial_step)));
        }
        if self.threads == Some(0) {
            return Err(SteerError::domain("threads must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartTrace {
    pub restart: usize,
    /// Completed sweeps.
    pub iterations: u64,
    pub accepted: u64,
    pub solver_calls: u64,
    /// `None` when the restart failed.
    pub alpha_star: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: MeasurementSet,
    pub alpha_star: f64,
    pub restarts: Vec<RestartTrace>,
    pub solver_calls: u64,
}

struct Climb {
    set: MeasurementSet,
    alpha: f64,
    trace: RestartTrace,
}

/// Rotates the whole set about z until the first direction has azimuth 0.
fn gauge_fix(dirs: &mut [BlochVector]) {
    let phi = dirs[0].y().atan2(dirs[0].x());
    let (s, c) = (-phi).sin_cos();
    for d in dirs.iter_mut() {
        *d = BlochVector::new(c * d.x() - s * d.y(), s * d.x() + c * d.y(), d.z());
    }
    dirs[0] = BlochVector::new(dirs[0].x().hypot(dirs[0].y()), 0.0, dirs[0].z());
}

/// Rotates `d` by `step` radians towards a random tangent direction.
fn tangent_step(d: BlochVector, step: f64, rng: &mut ChaCha8Rng) -> BlochVector {
    loop {
        let u = uniform_direction(rng);
        let t = u - d * u.dot(&d);
        if let Some(t) = t.normalized() {
            let moved = d * step.cos() + t * step.sin();
            return moved.normalized().unwrap_or(d);
        }
    }
}

/// Tilts an xz-plane direction by `±step` within the plane.
fn planar_step(d: BlochVector, step: f64, rng: &mut ChaCha8Rng) -> BlochVector {
    let theta = d.x().atan2(d.z()) + if rng.random_bool(0.5) { step } else { -step };
    BlochVector::new(theta.sin(), 0.0, theta.cos())
}

fn climb(
    start: Vec<BlochVector>,
    config: &SearchConfig,
    rng: &mut ChaCha8Rng,
    solver: &dyn ConicSolver,
    restart: usize,
) -> Result<Climb> {
    let mut dirs = start;
    gauge_fix(&mut dirs);
    let mut set = MeasurementSet::normalized(dirs)?;
    let mut calls = 1u64;
    let mut alpha = max_alpha(&set, solver)?.alpha_star;
    let mut step = config.initial_step;
    let (mut sweeps, mut accepted) = (0u64, 0u64);
    let budget = config.max_evaluations.unwrap_or(u64::MAX);

    'outer: while step >= config.min_step {
        let mut improved = false;
        for i in (0..set.len()).flat_map(|i| std::iter::repeat_n(i, config.proposals)) {
            if calls >= budget {
                break 'outer;
            }
            let mut dirs = set.directions().to_vec();
            dirs[i] = if i == 0 { planar_step(dirs[0], step, rng) } else { tangent_step(dirs[i], step, rng) };
            let candidate = MeasurementSet::normalized(dirs)?;
            calls += 1;
            match max_alpha(&candidate, solver) {
                Ok(r) if r.alpha_star <= alpha - ACCEPT_TOL => {
                    set = candidate;
                    alpha = r.alpha_star;
                    accepted += 1;
                    improved = true;
                }
                Ok(_) => {}
                Err(e) => warn!("restart {restart}: rejected candidate after solver error: {e}"),
            }
        }
        sweeps += 1;
        if !improved {
            step *= config.decay;
        }
    }
    Ok(Climb {
        set,
        alpha,
        trace: RestartTrace {
            restart,
            iterations: sweeps,
            accepted,
            solver_calls: calls,
            alpha_star: Some(alpha),
            error: None,
        },
    })
}

fn compare_sets(a: &MeasurementSet, b: &MeasurementSet) -> Ordering {
    let fa = a.directions().iter().flat_map(|d| d.0);
    let fb = b.directions().iter().flat_map(|d| d.0);
    fa.zip(fb).map(|(x, y)| x.total_cmp(&y)).find(|o| o.is_ne()).unwrap_or(a.len().cmp(&b.len()))
}

fn run_restarts<F>(config: &SearchConfig, solver: &dyn ConicSolver, start: F) -> Result<SearchResult>
where
    F: Fn(usize, &mut ChaCha8Rng) -> Vec<BlochVector> + Sync,
{
    config.validate()?;
    let work = || {
        (0..config.restarts)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(config.seed, stream_id(HILL_STREAM, r as u32));
                let dirs = start(r, &mut rng);
                climb(dirs, config, &mut rng, solver, r).map_err(|e| (r, e))
            })
            .collect::<Vec<_>>()
    };
    let outcomes = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SteerError::Resource(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut traces = Vec::with_capacity(outcomes.len());
    let mut best: Option<(f64, MeasurementSet)> = None;
    let mut last_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(c) => {
                traces.push(c.trace);
                let better = match &best {
                    None => true,
                    Some((a, s)) => c.alpha.total_cmp(a).then_with(|| compare_sets(&c.set, s)).is_lt(),
                };
                if better {
                    best = Some((c.alpha, c.set));
                }
            }
            Err((r, e)) => {
                warn!("restart {r} failed and was skipped: {e}");
                traces.push(RestartTrace {
                    restart: r,
                    iterations: 0,
                    accepted: 0,
                    solver_calls: 0,
                    alpha_star: None,
                    error: Some(e.to_string()),
                });
                last_error = Some(e);
            }
        }
    }
    let solver_calls = traces.iter().map(|t| t.solver_calls).sum();
    match best {
        Some((alpha_star, best)) => Ok(SearchResult { best, alpha_star, restarts: traces, solver_calls }),
        None => Err(last_error.unwrap_or_else(|| SteerError::numeric("no restart completed"))),
    }
}

/// Multi-start hill climb over `config.m` directions.
pub fn hill_climb(config: &SearchConfig, solver: &dyn ConicSolver) -> Result<SearchResult> {
    run_restarts(config, solver, |_, rng| (0..config.m).map(|_| uniform_direction(rng)).collect())
}

/// Hill climb started from `base` plus `extra` random directions.
///
/// `config.m` is ignored. Every restart starts from `base` itself, so the
/// reported `α*` never exceeds that of `base` by more than the solver tolerance.
pub fn seeded_refinement(
    base: &MeasurementSet,
    extra: usize,
    config: &SearchConfig,
    solver: &dyn ConicSolver,
) -> Result<SearchResult> {
    let config = SearchConfig { m: base.len() + extra, ..config.clone() };
    let base_alpha = max_alpha(base, solver)?.alpha_star;
    let result = run_restarts(&config, solver, |r, _| {
        let mut rng = stream_rng(config.seed, stream_id(REFINE_STREAM, r as u32));
        let mut dirs = base.directions().to_vec();
        dirs.extend((0..extra).map(|_| uniform_direction(&mut rng)));
        dirs
    })?;
    if result.alpha_star > base_alpha + 1e-6 {
        return Err(SteerError::numeric(format!(
            "refinement ended above its base: {} > {base_alpha}",
            result.alpha_star
        )));
    }
    Ok(SearchResult { solver_calls: result.solver_calls + 1, ..result })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub m_max: usize,
    /// Template for each per-m search; `m` and `seed` are overwritten.
    pub search: SearchConfig,
    /// Largest m that also gets a cold-start search besides the chained refinement.
    pub cold_start_max: usize,
    pub checkpoint: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn new(m_max: usize, seed: u64) -> Self {
        CampaignConfig { m_max, search: SearchConfig::new(2, seed), cold_start_max: 6, checkpoint: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRow {
    pub m: usize,
    pub alpha_star: f64,
    pub directions: Vec<BlochVector>,
    pub solver_calls: u64,
    pub paper_alpha_star: Option<f64>,
}

impl CampaignRow {
    pub fn delta(&self) -> Option<f64> {
        self.paper_alpha_star.map(|p| self.alpha_star - p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignFailure {
    pub m: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignTable {
    pub rows: Vec<CampaignRow>,
    pub failures: Vec<CampaignFailure>,
}

/// Wall-clock seconds per row, kept apart from the deterministic table.
pub type RowTimings = Vec<(usize, f64)>;

fn save_checkpoint(path: &PathBuf, table: &CampaignTable) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_vec_pretty(table)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn per_m_seed(seed: u64, m: usize) -> u64 {
    stream_rng(seed, stream_id(CAMPAIGN_STREAM, m as u32)).random()
}

/// Reproduces the threshold table for m = 2…`m_max`.
///
/// Each m is refined from the best m − 1 set with one extra direction, and for
/// `m ≤ cold_start_max` also searched from scratch. Completed rows are written to
/// the checkpoint after every m; an existing checkpoint is resumed.
pub fn table_one_campaign(config: &CampaignConfig, solver: &dyn ConicSolver) -> Result<(CampaignTable, RowTimings)> {
    if !(2..=14).contains(&config.m_max) {
        return Err(SteerError::domain(format!("m_max must lie in 2..=14, got {}", config.m_max)));
    }
    config.search.validate()?;
    let mut table = match &config.checkpoint {
        Some(p) if p.exists() => {
            let t: CampaignTable = serde_json::from_slice(&std::fs::read(p)?)?;
            info!("resuming campaign with {} completed rows", t.rows.len());
            t
        }
        _ => CampaignTable::default(),
    };
    let mut timings = RowTimings::new();
    let done = |t: &CampaignTable, m: usize| t.rows.iter().any(|r| r.m == m) || t.failures.iter().any(|f| f.m == m);

    for m in 2..=config.m_max {
        if done(&table, m) {
            continue;
        }
        let start = std::time::Instant::now();
        let search = SearchConfig { m, seed: per_m_seed(config.search.seed, m), ..config.search.clone() };
        let previous = table.rows.iter().filter(|r| r.m < m).max_by_key(|r| r.m).cloned();

        let mut candidates: Vec<SearchResult> = Vec::new();
        let mut calls = 0;
        let mut errors = Vec::new();
        if m <= config.cold_start_max || previous.is_none() {
            match hill_climb(&search, solver) {
                Ok(r) => candidates.push(r),
                Err(e) => errors.push(e.to_string()),
            }
        }
        if let Some(prev) = &previous {
            let base = MeasurementSet::normalized(prev.directions.clone())?;
            match seeded_refinement(&base, m - prev.m, &search, solver) {
                Ok(r) => candidates.push(r),
                Err(e) => errors.push(e.to_string()),
            }
        }
        calls += candidates.iter().map(|c| c.solver_calls).sum::<u64>();
        let best = candidates
            .into_iter()
            .min_by(|a, b| a.alpha_star.total_cmp(&b.alpha_star).then_with(|| compare_sets(&a.best, &b.best)));
        match best {
            Some(r) => {
                info!("m={m}: alpha* = {:.6}", r.alpha_star);
                table.rows.push(CampaignRow {
                    m,
                    alpha_star: r.alpha_star,
                    directions: r.best.directions().to_vec(),
                    solver_calls: calls,
                    paper_alpha_star: table_one_value(m),
                });
            }
            None => {
                let message = errors.join("; ");
                warn!("m={m} failed: {message}");
                table.failures.push(CampaignFailure { m, message });
            }
        }
        timings.push((m, start.elapsed().as_secs_f64()));
        if let Some(p) = &config.checkpoint {
            save_checkpoint(p, &table)?;
        }
    }
    table.rows.sort_by_key(|r| r.m);
    table.failures.sort_by_key(|f| f.m);
    Ok((table, timings))
}
