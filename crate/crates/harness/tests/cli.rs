use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparse-pr"))
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

/// Rows with the wall-clock columns removed.
fn without_timing(path: &Path) -> Vec<Vec<String>> {
    let (header, rows) = read_csv(path);
    let keep: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| !h.ends_with("_ms"))
        .map(|(i, _)| i)
        .collect();
    rows.into_iter()
        .map(|r| keep.iter().map(|&i| r[i].clone()).collect())
        .collect()
}

#[test]
fn config_file_is_overridden_by_flags_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pt.csv");
    let cfg = dir.path().join("grid.toml");
    std::fs::write(
        &cfg,
        "experiment = \"phase-transition\"\nn = [200]\nm = [40, 300]\ns = [4]\ntrials = 3\nseed = 9\n",
    )
    .unwrap();
    let status = bin()
        .arg("--config")
        .arg(&cfg)
        .args(["--trials", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let (header, rows) = read_csv(&out);
    assert!(header.iter().any(|h| h == "success_rate"));
    assert_eq!(rows.len(), 2);
    let trials_col = header.iter().position(|h| h == "trials").unwrap();
    assert!(rows.iter().all(|r| r[trials_col] == "2"));

    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("pt.csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["config"]["trials"], 2);
    assert_eq!(meta["config"]["seed"], 9);
    assert_eq!(meta["config"]["m"], serde_json::json!([40, 300]));
    assert_eq!(meta["config"]["experiment"], "phase-transition");
    assert_eq!(meta["rows"], 2);
}

#[test]
fn reruns_match_except_timing() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let status = bin()
            .args([
                "--experiment",
                "single-solve",
                "--n",
                "300",
                "--m",
                "200",
                "--s",
                "5",
                "--sigma",
                "0,0.01",
                "--trials",
                "4",
                "--seed",
                "17",
                "--algo",
                "proposed,iht",
                "--threads",
                threads,
                "--out",
            ])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        out
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "3");
    let rows = without_timing(&a);
    assert_eq!(rows.len(), 2 * 4 * 2);
    assert_eq!(rows, without_timing(&b));
    assert_eq!(rows, without_timing(&c));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");

    let bad_range = bin()
        .args([
            "--experiment",
            "timing",
            "--n",
            "100",
            "--m",
            "50",
            "--s",
            "0",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(bad_range.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_range.stderr).contains("s"));

    let unknown = bin().args(["--frobnicate"]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2));

    let missing_file = bin()
        .args(["--config", "/nonexistent/grid.toml"])
        .output()
        .unwrap();
    assert_eq!(missing_file.status.code(), Some(2));

    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("--experiment"));

    let unwritable = bin()
        .args([
            "--experiment",
            "timing",
            "--n",
            "50",
            "--m",
            "40",
            "--s",
            "2",
            "--out",
        ])
        .arg(dir.path().join("no/such/dir/x.csv"))
        .output()
        .unwrap();
    assert_eq!(unwritable.status.code(), Some(1));
}
