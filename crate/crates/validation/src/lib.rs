//! Support code for the acceptance checks: frozen thresholds, measured
//! calibration values and the one-line verdicts printed per check.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Thresholds the checks assert against. Loaded from
/// `tests/fixtures/thresholds.toml` so they cannot drift with the code.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub success_rel_err: f64,
    pub recovery_min_rate: f64,
    pub recovery_max_median_iters: f64,
    pub recovery_max_seconds: f64,
    pub tail_start_rel_err: f64,
    pub tail_target_rel_err: f64,
    pub tail_max_extra_iters: usize,
    pub tail_min_fraction: f64,
    pub contrast_min_wins: usize,
    pub baseline_min_r2: f64,
    pub noisy_max_iters: usize,
    pub noisy_floor_factor: f64,
    pub transition_max_low: f64,
    pub transition_min_high: f64,
    pub sweep_min_r2: f64,
    pub init_max_distance_ratio: f64,
    pub init_min_hits: usize,
    pub coverage_min_rate: f64,
}

impl Thresholds {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: &'static str,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("[{tag}] {} {}: {}", self.id, self.title, self.detail)
    }

    /// Prints the verdict line, bypassing test output capture so every line
    /// shows up in a normal `cargo test` run.
    pub fn report(&self) {
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "{}", self.line());
    }
}

/// Writes a measured calibration value next to the build artifacts before
/// anything is asserted against it.
pub fn record_calibration<T: Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(value).expect("calibration values serialize");
    std::fs::write(&path, text)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_lines() {
        let v = Verdict {
            id: "7",
            title: "oracles",
            pass: true,
            detail: "ok".into(),
        };
        assert_eq!(v.line(), "[PASS] 7 oracles: ok");
        let f = Verdict { pass: false, ..v };
        assert!(f.line().starts_with("[FAIL]"));
    }

    #[test]
    fn calibration_round_trip() {
        let dir = std::env::temp_dir().join(format!("spr-cal-{}", std::process::id()));
        let path =
            record_calibration(&dir, "floor", &serde_json::json!({ "median": 0.5 })).unwrap();
        let back: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back["median"], 0.5);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
