//! One Monte Carlo trial: generate an instance, initialize, run each algorithm.

use std::time::Instant;

use sparse_pr::solver::{iht_solve, solve};
use sparse_pr::spectral::{spectral_init, DEFAULT_POWER_TOL};
use sparse_pr::{
    generate_gaussian_matrix, generate_sparse_signal, measure, metrics, Config, Instance, Outcome,
    TrialSeeds,
};

use crate::config::Algorithm;

/// How the noise level of a trial is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    Sigma(f64),
    /// `σ = ‖x♮‖ · 10^(−snr/20)`, evaluated per trial.
    SnrDb(f64),
}

impl Noise {
    pub fn sigma_for(self, truth_norm: f64) -> f64 {
        match self {
            Noise::Sigma(s) => s,
            Noise::SnrDb(db) => truth_norm * 10f64.powf(-db / 20.0),
        }
    }
}

/// Parameters of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub noise: Noise,
    pub eta: f64,
    pub max_iters: usize,
    pub master_seed: u64,
    pub trial: u64,
}

#[derive(Debug, Clone)]
pub struct AlgoRun {
    pub algo: Algorithm,
    /// `None` when initialization failed.
    pub outcome: Option<Outcome>,
    pub rel_err: f64,
}

impl AlgoRun {
    pub fn iterations(&self) -> usize {
        self.outcome.as_ref().map_or(0, |o| o.iterations())
    }

    pub fn time_ms(&self) -> f64 {
        self.outcome
            .as_ref()
            .map_or(0.0, |o| o.elapsed().as_secs_f64() * 1e3)
    }

    pub fn termination(&self) -> &'static str {
        self.outcome
            .as_ref()
            .map_or("init-error", |o| o.termination.as_str())
    }

    pub fn success(&self) -> bool {
        metrics::is_success(self.rel_err)
    }
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub spec: TrialSpec,
    pub seed: u64,
    pub sigma: f64,
    pub truth_norm: f64,
    pub init_rel_err: f64,
    pub init_ms: f64,
    pub init_error: Option<String>,
    pub runs: Vec<AlgoRun>,
}

/// Solver settings for a trial: noise-free data stops on the ground-truth
/// error, noisy data only on the relative step change.
pub fn solver_config(spec: &TrialSpec, sigma: f64) -> Config {
    let mut cfg = if sigma > 0.0 {
        Config::blind(spec.s)
    } else {
        Config::new(spec.s)
    };
    cfg.eta = spec.eta;
    cfg.max_iters = spec.max_iters;
    cfg
}

pub fn generate(spec: &TrialSpec) -> sparse_pr::Result<(Instance, u64)> {
    let seeds = TrialSeeds::derive(spec.master_seed, spec.trial);
    let truth = generate_sparse_signal(spec.n, spec.s, seeds.signal)?;
    let sigma = spec.noise.sigma_for(truth.norm());
    let a = generate_gaussian_matrix(spec.m, spec.n, seeds.matrix)?;
    Ok((measure(a, truth, sigma, seeds.noise)?, seeds.trial))
}

/// Runs every algorithm in `algos` on the same instance and initial point.
pub fn run_trial(spec: &TrialSpec, algos: &[Algorithm]) -> sparse_pr::Result<TrialResult> {
    let (inst, seed) = generate(spec)?;
    let truth = inst
        .truth()
        .expect("generated instances carry ground truth");
    let sigma = inst.sigma();
    let cfg = solver_config(spec, sigma);

    let started = Instant::now();
    let init = spectral_init(&inst, spec.s, DEFAULT_POWER_TOL);
    let init_ms = started.elapsed().as_secs_f64() * 1e3;

    let (init_rel_err, init_error, runs) = match init {
        Ok(report) => {
            let runs = algos
                .iter()
                .map(|&algo| {
                    let out = match algo {
                        Algorithm::Proposed => solve(&inst, report.x0.clone(), &cfg)?,
                        Algorithm::Iht => iht_solve(&inst, report.x0.clone(), &cfg)?,
                    };
                    let rel_err = metrics::relative_error(&out.final_iterate.x, truth)?;
                    Ok(AlgoRun {
                        algo,
                        outcome: Some(out),
                        rel_err,
                    })
                })
                .collect::<sparse_pr::Result<Vec<_>>>()?;
            (metrics::relative_error(&report.x0, truth)?, None, runs)
        }
        // The estimate defaults to zero, whose relative error is one.
        Err(e) => (
            1.0,
            Some(e.to_string()),
            algos
                .iter()
                .map(|&algo| AlgoRun {
                    algo,
                    outcome: None,
                    rel_err: 1.0,
                })
                .collect(),
        ),
    };
    Ok(TrialResult {
        spec: *spec,
        seed,
        sigma,
        truth_norm: truth.norm(),
        init_rel_err,
        init_ms,
        init_error,
        runs,
    })
}
