//! Experiment runners. Each expands an [`ExperimentGrid`] into trials, runs
//! them on a worker pool and aggregates the results into CSV rows.
//!
//! Trials are keyed by `(cell, trial)`; results come back in that order no
//! matter how many threads ran them, so the non-timing output is identical
//! for serial and parallel runs.

use serde::Serialize;

use crate::config::{Algorithm, ExperimentGrid};
use crate::stats::{mean, median, std_dev};
use crate::trial::{run_trial, Noise, TrialResult, TrialSpec};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("trial failed: {0}")]
    Trial(#[from] sparse_pr::Error),
    #[error("cannot build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// One `(n, m, s, noise)` combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub m: usize,
    pub m_ratio: f64,
    pub s: usize,
    pub noise: Noise,
}

impl Cell {
    fn spec(&self, grid: &ExperimentGrid, trial: u64) -> TrialSpec {
        TrialSpec {
            n: self.n,
            m: self.m,
            s: self.s,
            noise: self.noise,
            eta: grid.eta,
            max_iters: grid.max_iters,
            master_seed: grid.seed,
            trial,
        }
    }
}

/// Cells in `n → s → m → noise` order. Noise covers every `sigma` then every `snr_db`.
pub fn cells(grid: &ExperimentGrid) -> Vec<Cell> {
    let noises: Vec<Noise> = grid
        .sigma
        .iter()
        .map(|&s| Noise::Sigma(s))
        .chain(grid.snr_db.iter().map(|&d| Noise::SnrDb(d)))
        .collect();
    let mut out = Vec::new();
    for &n in &grid.n {
        for &s in &grid.s {
            for (m, m_ratio) in grid.sample_sizes(n) {
                for &noise in &noises {
                    out.push(Cell {
                        n,
                        m,
                        m_ratio,
                        s,
                        noise,
                    });
                }
            }
        }
    }
    out
}

/// Runs `trials` trials of every cell on `threads` workers. The outer vector
/// follows `cells`, the inner one the trial index.
pub fn run_cells(grid: &ExperimentGrid, cells: &[Cell]) -> Result<Vec<Vec<TrialResult>>, RunError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(grid.threads)
        .build()?;
    let tasks: Vec<TrialSpec> = cells
        .iter()
        .flat_map(|c| (0..grid.trials as u64).map(move |t| c.spec(grid, t)))
        .collect();
    let results = pool.install(|| {
        tasks
            .par_iter()
            .map(|spec| run_trial(spec, &grid.algorithms))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut it = results.into_iter();
    Ok(cells
        .iter()
        .map(|_| it.by_ref().take(grid.trials).collect())
        .collect())
}

fn effective_sigma(cell: &Cell, trials: &[TrialResult]) -> f64 {
    match cell.noise {
        Noise::Sigma(s) => s,
        Noise::SnrDb(_) => mean(&trials.iter().map(|t| t.sigma).collect::<Vec<_>>()),
    }
}

fn runs_of(
    trials: &[TrialResult],
    algo: Algorithm,
) -> impl Iterator<Item = (&TrialResult, &crate::trial::AlgoRun)> {
    trials
        .iter()
        .filter_map(move |t| t.runs.iter().find(|r| r.algo == algo).map(|r| (t, r)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub sigma: f64,
    pub algo: &'static str,
    pub trial: u64,
    pub seed: u64,
    pub iter: usize,
    pub rel_err: f64,
    pub support_correct: bool,
    pub cum_time_ms: f64,
}

/// Per-iteration error traces of every `(algorithm, trial)`.
pub fn run_convergence(grid: &ExperimentGrid) -> Result<Vec<ConvergenceRow>, RunError> {
    let cells = cells(grid);
    let results = run_cells(grid, &cells)?;
    let mut rows = Vec::new();
    for (cell, trials) in cells.iter().zip(&results) {
        for &algo in &grid.algorithms {
            for (t, run) in runs_of(trials, algo) {
                let Some(out) = &run.outcome else {
                    rows.push(ConvergenceRow {
                        n: cell.n,
                        m: cell.m,
                        s: cell.s,
                        sigma: t.sigma,
                        algo: algo.as_str(),
                        trial: t.spec.trial,
                        seed: t.seed,
                        iter: 0,
                        rel_err: run.rel_err,
                        support_correct: false,
                        cum_time_ms: 0.0,
                    });
                    continue;
                };
                for rec in &out.trace {
                    rows.push(ConvergenceRow {
                        n: cell.n,
                        m: cell.m,
                        s: cell.s,
                        sigma: t.sigma,
                        algo: algo.as_str(),
                        trial: t.spec.trial,
                        seed: t.seed,
                        iter: rec.k,
                        rel_err: rec.rel_err.unwrap_or(f64::NAN),
                        support_correct: rec.support_correct.unwrap_or(false),
                        cum_time_ms: rec.elapsed.as_secs_f64() * 1e3,
                    });
                }
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseTransitionRow {
    pub n: usize,
    pub s: usize,
    pub m: usize,
    pub sigma: f64,
    pub algo: &'static str,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub master_seed: u64,
}

/// Success rate (final relative error below 1e-3) per cell and algorithm.
pub fn run_phase_transition(grid: &ExperimentGrid) -> Result<Vec<PhaseTransitionRow>, RunError> {
    let cells = cells(grid);
    let results = run_cells(grid, &cells)?;
    let mut rows = Vec::new();
    for (cell, trials) in cells.iter().zip(&results) {
        for &algo in &grid.algorithms {
            let successes = runs_of(trials, algo).filter(|(_, r)| r.success()).count();
            rows.push(PhaseTransitionRow {
                n: cell.n,
                s: cell.s,
                m: cell.m,
                sigma: effective_sigma(cell, trials),
                algo: algo.as_str(),
                trials: trials.len(),
                successes,
                success_rate: successes as f64 / trials.len() as f64,
                master_seed: grid.seed,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseSweepRow {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub algo: &'static str,
    /// `20·log10(‖x♮‖/σ)`, averaged over trials; infinite for noise-free rows.
    pub snr_db: f64,
    /// Noise level, averaged over trials when derived from an SNR.
    pub sigma: f64,
    pub mean_rel_err: f64,
    pub std_rel_err: f64,
    pub trials: usize,
    pub master_seed: u64,
}

/// Mean and spread of the final relative error per noise level.
pub fn run_noise_sweep(grid: &ExperimentGrid) -> Result<Vec<NoiseSweepRow>, RunError> {
    let cells = cells(grid);
    let results = run_cells(grid, &cells)?;
    let mut rows = Vec::new();
    for (cell, trials) in cells.iter().zip(&results) {
        let snr_db = match cell.noise {
            Noise::SnrDb(db) => db,
            Noise::Sigma(0.0) => f64::INFINITY,
            Noise::Sigma(s) => mean(
                &trials
                    .iter()
                    .map(|t| 20.0 * (t.truth_norm / s).log10())
                    .collect::<Vec<_>>(),
            ),
        };
        for &algo in &grid.algorithms {
            let errs: Vec<f64> = runs_of(trials, algo).map(|(_, r)| r.rel_err).collect();
            rows.push(NoiseSweepRow {
                n: cell.n,
                m: cell.m,
                s: cell.s,
                algo: algo.as_str(),
                snr_db,
                sigma: effective_sigma(cell, trials),
                mean_rel_err: mean(&errs),
                std_rel_err: std_dev(&errs),
                trials: errs.len(),
                master_seed: grid.seed,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub n: usize,
    pub m: usize,
    pub m_ratio: f64,
    pub s: usize,
    pub algo: &'static str,
    pub trials: usize,
    pub successes: usize,
    /// Median solve wall time; initialization excluded.
    pub median_time_ms: f64,
    /// Median spectral-initialization wall time.
    pub median_init_ms: f64,
    /// Median iteration count.
    pub iterations: f64,
    pub median_time_per_iter_ms: f64,
    pub master_seed: u64,
}

/// Median solve time per cell and algorithm.
pub fn run_timing(grid: &ExperimentGrid) -> Result<Vec<TimingRow>, RunError> {
    let cells = cells(grid);
    let results = run_cells(grid, &cells)?;
    let mut rows = Vec::new();
    for (cell, trials) in cells.iter().zip(&results) {
        for &algo in &grid.algorithms {
            let runs: Vec<_> = runs_of(trials, algo).collect();
            let times: Vec<f64> = runs.iter().map(|(_, r)| r.time_ms()).collect();
            let inits: Vec<f64> = runs.iter().map(|(t, _)| t.init_ms).collect();
            let iters: Vec<f64> = runs.iter().map(|(_, r)| r.iterations() as f64).collect();
            let per_iter: Vec<f64> = runs
                .iter()
                .filter(|(_, r)| r.iterations() > 0)
                .map(|(_, r)| r.time_ms() / r.iterations() as f64)
                .collect();
            rows.push(TimingRow {
                n: cell.n,
                m: cell.m,
                m_ratio: cell.m_ratio,
                s: cell.s,
                algo: algo.as_str(),
                trials: runs.len(),
                successes: runs.iter().filter(|(_, r)| r.success()).count(),
                median_time_ms: median(&times),
                median_init_ms: median(&inits),
                iterations: median(&iters),
                median_time_per_iter_ms: median(&per_iter),
                master_seed: grid.seed,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleSolveRow {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub sigma: f64,
    pub algo: &'static str,
    pub trial: u64,
    pub seed: u64,
    pub iterations: usize,
    pub termination: &'static str,
    pub init_rel_err: f64,
    pub rel_err: f64,
    pub success: bool,
    pub fallbacks: usize,
    pub init_ms: f64,
    pub time_ms: f64,
}

/// One summary row per `(cell, trial, algorithm)`.
pub fn run_single_solve(grid: &ExperimentGrid) -> Result<Vec<SingleSolveRow>, RunError> {
    let cells = cells(grid);
    let results = run_cells(grid, &cells)?;
    let mut rows = Vec::new();
    for (cell, trials) in cells.iter().zip(&results) {
        for t in trials {
            for run in &t.runs {
                rows.push(SingleSolveRow {
                    n: cell.n,
                    m: cell.m,
                    s: cell.s,
                    sigma: t.sigma,
                    algo: run.algo.as_str(),
                    trial: t.spec.trial,
                    seed: t.seed,
                    iterations: run.iterations(),
                    termination: run.termination(),
                    init_rel_err: t.init_rel_err,
                    rel_err: run.rel_err,
                    success: run.success(),
                    fallbacks: run.outcome.as_ref().map_or(0, |o| o.newton_fallbacks_used),
                    init_ms: t.init_ms,
                    time_ms: run.time_ms(),
                });
            }
        }
    }
    Ok(rows)
}
