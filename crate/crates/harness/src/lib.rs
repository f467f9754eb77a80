//! Experiment harness for the sparse phase retrieval solvers.
//!
//! Expands a parameter grid into seeded Monte Carlo trials, runs them on a
//! thread pool and writes one CSV per run plus a JSON metadata sidecar.

pub mod config;
pub mod experiments;
pub mod output;
pub mod stats;
pub mod trial;

use std::path::PathBuf;

pub use config::{parse_config, Algorithm, ConfigError, ExperimentGrid, ExperimentKind};
pub use experiments::{
    run_convergence, run_noise_sweep, run_phase_transition, run_single_solve, run_timing,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] experiments::RunError),
    #[error(transparent)]
    Output(#[from] output::OutputError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: usize,
    pub csv: PathBuf,
    pub metadata: PathBuf,
}

/// Runs the experiment described by `grid` and writes its CSV and metadata.
pub fn run(grid: &ExperimentGrid) -> Result<RunSummary, HarnessError> {
    grid.validate()?;
    let path = grid.out.as_path();
    let rows = match grid.experiment {
        ExperimentKind::Convergence => {
            let rows = run_convergence(grid)?;
            output::write_csv(path, &rows)?;
            rows.len()
        }
        ExperimentKind::PhaseTransition => {
            let rows = run_phase_transition(grid)?;
            output::write_csv(path, &rows)?;
            rows.len()
        }
        ExperimentKind::NoiseSweep => {
            let rows = run_noise_sweep(grid)?;
            output::write_csv(path, &rows)?;
            rows.len()
        }
        ExperimentKind::Timing => {
            let rows = run_timing(grid)?;
            output::write_csv(path, &rows)?;
            rows.len()
        }
        ExperimentKind::SingleSolve => {
            let rows = run_single_solve(grid)?;
            output::write_csv(path, &rows)?;
            rows.len()
        }
    };
    let metadata = output::write_metadata(grid, rows)?;
    Ok(RunSummary {
        rows,
        csv: grid.out.clone(),
        metadata,
    })
}
