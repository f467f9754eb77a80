//! Command-line and file configuration for experiment runs.
//!
//! Flags override values read from `--config <file.toml>`. The resolved
//! [`ExperimentGrid`] is what every runner consumes and what the metadata
//! sidecar records.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Convergence,
    PhaseTransition,
    NoiseSweep,
    Timing,
    SingleSolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Newton hard thresholding.
    Proposed,
    /// Iterated hard thresholding on the amplitude loss.
    Iht,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Proposed => "proposed",
            Algorithm::Iht => "iht",
        }
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub experiment: ExperimentKind,
    pub n: Vec<usize>,
    /// Explicit sample sizes; empty when `m_ratio` is used instead.
    pub m: Vec<usize>,
    /// Sample sizes as fractions of `n`; empty when `m` is used.
    pub m_ratio: Vec<f64>,
    pub s: Vec<usize>,
    pub sigma: Vec<f64>,
    pub snr_db: Vec<f64>,
    pub eta: f64,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub max_iters: usize,
    pub threads: usize,
    pub out: PathBuf,
}

impl ExperimentGrid {
    /// Sample sizes for dimension `n`, as `(m, m/n)` pairs.
    pub fn sample_sizes(&self, n: usize) -> Vec<(usize, f64)> {
        if self.m.is_empty() {
            self.m_ratio
                .iter()
                .map(|&r| (((r * n as f64).round() as usize).max(1), r))
                .collect()
        } else {
            self.m.iter().map(|&m| (m, m as f64 / n as f64)).collect()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn nonempty<T>(field: &'static str, v: &[T]) -> Result<(), ConfigError> {
            if v.is_empty() {
                Err(ConfigError::Range {
                    field,
                    reason: "list must not be empty".into(),
                })
            } else {
                Ok(())
            }
        }
        let range = |field: &'static str, reason: String| Err(ConfigError::Range { field, reason });

        nonempty("n", &self.n)?;
        nonempty("s", &self.s)?;
        nonempty("algo", &self.algorithms)?;
        if self.m.is_empty() && self.m_ratio.is_empty() {
            return Err(ConfigError::Missing("m"));
        }
        if !self.m.is_empty() && !self.m_ratio.is_empty() {
            return range("m", "give either m or m-ratio, not both".into());
        }
        if let Some(&n) = self.n.iter().find(|&&n| n == 0) {
            return range("n", format!("must be >= 1, got {n}"));
        }
        if let Some(&s) = self.s.iter().find(|&&s| s == 0) {
            return range("s", format!("must be >= 1, got {s}"));
        }
        let min_n = *self.n.iter().min().unwrap();
        if let Some(&s) = self.s.iter().find(|&&s| s > min_n) {
            return range("s", format!("must not exceed n={min_n}, got {s}"));
        }
        if self.m.contains(&0) {
            return range("m", "must be >= 1".into());
        }
        if let Some(r) = self.m_ratio.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return range("m-ratio", format!("must be positive, got {r}"));
        }
        if let Some(v) = self.sigma.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return range("sigma", format!("must be finite and >= 0, got {v}"));
        }
        if let Some(v) = self.snr_db.iter().find(|v| !v.is_finite()) {
            return range("snr-db", format!("must be finite, got {v}"));
        }
        if self.sigma.is_empty() && self.snr_db.is_empty() {
            return range("sigma", "give at least one sigma or snr-db value".into());
        }
        if !(self.eta > 0.0 && self.eta < 2.0) {
            return range("eta", format!("must lie in (0, 2), got {}", self.eta));
        }
        if self.trials == 0 {
            return range("trials", "must be >= 1".into());
        }
        if self.max_iters == 0 {
            return range("max-iters", "must be >= 1".into());
        }
        if self.threads == 0 {
            return range("threads", "must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Cli(#[from] clap::Error),
    #[error("missing required field: {0}")]
    Missing(&'static str),
    #[error("invalid value for {field}: {reason}")]
    Range { field: &'static str, reason: String },
    #[error("cannot read config file {path}: {reason}")]
    File { path: PathBuf, reason: String },
}

/// Optional settings shared by the command line and the config file.
#[derive(Debug, Default, Clone, Parser, Deserialize)]
#[command(
    name = "sparse-pr",
    version,
    about = "Sparse phase retrieval experiments: convergence, phase transition, noise sweep, timing"
)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Structured TOML file with the same keys as the long flags.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub experiment: Option<ExperimentKind>,
    /// Signal dimensions (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Sample sizes (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Sample sizes as fractions of n, used instead of --m.
    #[arg(long, value_delimiter = ',')]
    pub m_ratio: Option<Vec<f64>>,
    /// Sparsity levels (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub s: Option<Vec<usize>>,
    /// Noise levels sigma (comma separated).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub sigma: Option<Vec<f64>>,
    /// Signal-to-noise ratios in dB for the noise sweep.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub snr_db: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Algorithms to run (comma separated): proposed, iht.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub algo: Option<Vec<Algorithm>>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output CSV path. Metadata goes to `<out>.meta.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Settings {
    /// `self` with every unset field taken from `base`.
    fn or(self, base: Settings) -> Settings {
        Settings {
            config: self.config.or(base.config),
            experiment: self.experiment.or(base.experiment),
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            m_ratio: self.m_ratio.or(base.m_ratio),
            s: self.s.or(base.s),
            sigma: self.sigma.or(base.sigma),
            snr_db: self.snr_db.or(base.snr_db),
            eta: self.eta.or(base.eta),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            algo: self.algo.or(base.algo),
            max_iters: self.max_iters.or(base.max_iters),
            threads: self.threads.or(base.threads),
            out: self.out.or(base.out),
        }
    }

    pub fn from_file(path: &Path) -> Result<Settings, ConfigError> {
        let file_err = |reason: String| ConfigError::File {
            path: path.to_path_buf(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
        toml::from_str(&text).map_err(|e| file_err(e.to_string()))
    }

    fn resolve(self) -> Result<ExperimentGrid, ConfigError> {
        let experiment = self.experiment.ok_or(ConfigError::Missing("experiment"))?;
        let n = self.n.ok_or(ConfigError::Missing("n"))?;
        let s = self.s.ok_or(ConfigError::Missing("s"))?;
        let out = self.out.ok_or(ConfigError::Missing("out"))?;
        let snr_db = self.snr_db.unwrap_or_default();
        let sigma = match self.sigma {
            Some(v) => v,
            None if snr_db.is_empty() => vec![0.0],
            None => Vec::new(),
        };
        let threads = self
            .threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
        let grid = ExperimentGrid {
            experiment,
            n,
            m: self.m.unwrap_or_default(),
            m_ratio: self.m_ratio.unwrap_or_default(),
            s,
            sigma,
            snr_db,
            eta: self.eta.unwrap_or(0.95),
            trials: self.trials.unwrap_or(1),
            seed: self.seed.unwrap_or(0),
            algorithms: self.algo.unwrap_or_else(|| vec![Algorithm::Proposed]),
            max_iters: self.max_iters.unwrap_or(1000),
            threads,
            out,
        };
        grid.validate()?;
        Ok(grid)
    }
}

/// Parses command-line arguments (program name first) into a validated grid.
pub fn parse_config<I, A>(args: I) -> Result<ExperimentGrid, ConfigError>
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = Settings::try_parse_from(args)?;
    let merged = match &cli.config {
        Some(path) => cli.clone().or(Settings::from_file(path)?),
        None => cli,
    };
    merged.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(line: &str) -> Result<ExperimentGrid, ConfigError> {
        parse_config(std::iter::once("sparse-pr").chain(line.split_whitespace()))
    }

    #[test]
    fn convergence_grid_from_flags() {
        let g = parse(
            "--experiment convergence --n 5000 --m 3000 --s 80 --trials 100 --seed 1 \
             --algo proposed,iht --out conv.csv",
        )
        .unwrap();
        assert_eq!(g.experiment, ExperimentKind::Convergence);
        assert_eq!(
            (g.n.clone(), g.m.clone(), g.s.clone()),
            (vec![5000], vec![3000], vec![80])
        );
        assert_eq!(g.trials, 100);
        assert_eq!(g.seed, 1);
        assert_eq!(g.algorithms, vec![Algorithm::Proposed, Algorithm::Iht]);
        assert_eq!(g.sigma, vec![0.0]);
        assert_eq!(g.eta, 0.95);
        assert_eq!(g.max_iters, 1000);
    }

    #[test]
    fn zero_sparsity_is_a_range_error() {
        let err = parse("--experiment timing --n 100 --m 50 --s 0 --out x.csv").unwrap_err();
        match err {
            ConfigError::Range { field, .. } => assert_eq!(field, "s"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_string("--experiment timing --n 100 --m 50 --s 0 --out x.csv").contains("s:"));
    }

    fn err_string(line: &str) -> String {
        parse(line).unwrap_err().to_string()
    }

    #[test]
    fn distinct_messages() {
        assert!(err_string("--experiment timing --n 100 --s 5 --out x.csv")
            .contains("missing required field: m"));
        assert!(err_string("--n 100 --m 50 --s 5 --out x.csv").contains("experiment"));
        assert!(
            err_string("--experiment timing --n 100 --m 50 --s 5 --out x.csv --bogus 1")
                .contains("--bogus")
        );
        assert!(
            err_string("--experiment timing --n 100 --m 50 --s 5 --eta 2.5 --out x.csv")
                .contains("eta")
        );
        assert!(
            err_string("--experiment timing --n 100 --m 50 --s 5 --trials 0 --out x.csv")
                .contains("trials")
        );
    }

    #[test]
    fn empty_algorithm_list_rejected() {
        let mut g = parse("--experiment convergence --n 10 --m 20 --s 2 --out x.csv").unwrap();
        g.algorithms.clear();
        assert!(matches!(
            g.validate(),
            Err(ConfigError::Range { field: "algo", .. })
        ));
    }

    #[test]
    fn sample_sizes_from_ratio() {
        let g = parse("--experiment timing --n 1000 --m-ratio 0.3,0.5 --s 5 --out x.csv").unwrap();
        assert_eq!(g.sample_sizes(1000), vec![(300, 0.3), (500, 0.5)]);
    }
}
