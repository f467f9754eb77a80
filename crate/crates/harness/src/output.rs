//! CSV writing and the JSON metadata sidecar.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::ExperimentGrid;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Writes rows with a header line. An empty row set still produces a file.
pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<(), OutputError> {
    let wrap = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    for row in rows {
        w.serialize(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `<out>.meta.json`
pub fn metadata_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    config: &'a ExperimentGrid,
    rows: usize,
    package: &'static str,
    version: &'static str,
    created_unix_secs: u64,
    notes: Notes,
}

#[derive(Debug, Serialize)]
struct Notes {
    timing: &'static str,
    stopping: &'static str,
    noise: &'static str,
    seeds: &'static str,
}

pub fn write_metadata(grid: &ExperimentGrid, rows: usize) -> Result<PathBuf, OutputError> {
    let path = metadata_path(&grid.out);
    let meta = Metadata {
        config: grid,
        rows,
        package: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        created_unix_secs: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        notes: Notes {
            timing: "wall time around the solver only; spectral initialization timed separately; \
                     timing tables report medians over trials",
            stopping: "sigma = 0: stop when relative error < 1e-3 or relative step < 1e-3; \
                       sigma > 0: relative step < 1e-3 only; max-iters cap always applies",
            noise: "y_i = (a_i.x)^2 + sigma*eps_i, eps redrawn per trial; SNR in dB is \
                    20*log10(|x|/sigma); negative intensities clamp to zero amplitude",
            seeds: "trial seed derived from (master seed, trial index); matrix, signal and noise \
                    streams are the trial seed xor fixed role tags",
        },
    };
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(&path, text).map_err(|source| OutputError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
