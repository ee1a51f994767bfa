#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn freqbell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqbell"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout_of(args: &[&str]) -> String {
    let out = freqbell(args);
    assert!(
        out.status.success(),
        "freqbell {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Data rows of a CSV report (comment lines and header dropped).
pub fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Value of `key` in the `# summary {...}` comment line.
pub fn summary(csv: &str) -> serde_json::Value {
    let line = csv
        .lines()
        .find_map(|l| l.strip_prefix("# summary "))
        .expect("summary line");
    let v: serde_json::Value = serde_json::from_str(line).expect("summary json");
    v
}

pub fn cell(rows: &[Vec<String>], key: &str, column: usize) -> f64 {
    rows.iter()
        .find(|r| r[0] == key)
        .unwrap_or_else(|| panic!("row {key}"))[column]
        .parse()
        .expect("number")
}

/// Compares two CSV reports: text cells exactly, numeric cells to `tol`.
pub fn assert_csv_close(got: &str, want: &str, tol: f64) {
    let (g, w): (Vec<&str>, Vec<&str>) = (got.lines().collect(), want.lines().collect());
    assert_eq!(g.len(), w.len(), "line count differs");
    for (lg, lw) in g.iter().zip(&w) {
        if lw.starts_with('#') {
            continue;
        }
        for (a, b) in lg.split(',').zip(lw.split(',')) {
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => assert!((x - y).abs() <= tol, "{x} vs {y} in {lg:?}"),
                _ => assert_eq!(a, b),
            }
        }
    }
}
