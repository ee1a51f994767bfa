mod common;

use std::fs;

use common::*;
use tempfile::tempdir;

fn flat_histogram(count: u64) -> String {
    let mut s = String::from("# coincidence-histogram v1, bin_width_s=5e-10\n");
    for ch in ["EE", "EO", "OE", "OO"] {
        for k in 0..200 {
            s.push_str(&format!("{ch},{k},{count}\n"));
        }
    }
    s
}

#[test]
fn golden_six_bin_chsh() {
    let want = fs::read_to_string(golden_dir().join("chsh_finite_6bins.csv")).unwrap();
    let got = stdout_of(&["chsh", "finite"]);
    assert_csv_close(&got, &want, 1e-9);
    let s = cell(&rows(&got), "S", 2);
    assert!(s > 2.0 && s < 2.566);
}

#[test]
fn golden_pattern_and_eval() {
    let want = fs::read_to_string(golden_dir().join("pattern_6bins.csv")).unwrap();
    let got = stdout_of(&["pattern", "--model", "both", "--steps", "13"]);
    assert_csv_close(&got, &want, 1e-9);
    let gap = summary(&got)["max_gap"].as_f64().unwrap();
    let golden_gap = summary(&want)["max_gap"].as_f64().unwrap();
    assert!((gap - golden_gap).abs() < 1e-9);

    let want = fs::read_to_string(golden_dir().join("chsh_eval.csv")).unwrap();
    assert_csv_close(&stdout_of(&["chsh", "eval"]), &want, 1e-9);
}

#[test]
fn outputs_are_byte_reproducible() {
    let dir = tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    for name in ["a.csv", "b.csv"] {
        stdout_of(&["pattern", "--model", "both", "--steps", "9", "--seed", "4", "--out", &p(name)]);
    }
    assert_eq!(fs::read(p("a.csv")).unwrap(), fs::read(p("b.csv")).unwrap());
    assert_eq!(fs::read(p("a.csv.run.json")).unwrap(), fs::read(p("b.csv.run.json")).unwrap());

    for name in ["s1", "s2"] {
        stdout_of(&["simulate", "--seed", "8", "--out", &p(name)]);
    }
    for file in ["A0B0.csv", "A0B1.csv", "A1B0.csv", "A1B1.csv", "run.json"] {
        let a = fs::read(dir.path().join("s1").join(file)).unwrap();
        let b = fs::read(dir.path().join("s2").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }

    let mc = |seed: &str| stdout_of(&["chsh", "montecarlo", "--runs", "50", "--seed", seed]);
    assert_eq!(mc("3"), mc("3"));
    assert_ne!(mc("3"), mc("4"));
}

#[test]
fn run_record_embeds_config_and_version() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("eval.csv");
    stdout_of(&["chsh", "eval", "--duration", "900", "--out", out.to_str().unwrap()]);
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("eval.csv.run.json")).unwrap()).unwrap();
    assert_eq!(record["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(record["command"], "chsh eval");
    assert_eq!(record["config"]["measurement"]["duration"], 900.0);
    assert_eq!(record["config"]["rf_frequency"], 25e9);
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("# config {")));

    let json: serde_json::Value = serde_json::from_str(&stdout_of(&["chsh", "eval", "--format", "json"])).unwrap();
    assert_eq!(json["data"].as_array().unwrap().len(), 5);
    assert_eq!(json["config"]["center_frequency"], 193.125e12);
}

#[test]
fn flags_override_config_file() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "bins = [1, 2, 3, 4]\nseed = 9\n[measurement]\nduration = 60.0\ncrosstalk = 0.1\n[dispersion]\nper_bin_overrides = { \"2\" = 3.14 }\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let json = |extra: &[&str]| -> serde_json::Value {
        let mut args = vec!["chsh", "finite", "--format", "json", "--config", cfg];
        args.extend_from_slice(extra);
        serde_json::from_str(&stdout_of(&args)).unwrap()
    };
    let from_file = json(&[]);
    assert_eq!(from_file["config"]["bins"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(from_file["config"]["seed"], 9);
    assert_eq!(from_file["config"]["measurement"]["crosstalk"], 0.1);
    assert_eq!(from_file["config"]["measurement"]["pair_rate"], 1.5);
    let overridden = json(&["--seed", "2", "--crosstalk", "0", "--bins", "1..6"]);
    assert_eq!(overridden["config"]["seed"], 2);
    assert_eq!(overridden["config"]["measurement"]["crosstalk"], 0.0);
    assert_eq!(overridden["config"]["bins"], serde_json::json!([1, 2, 3, 4, 5, 6]));
    assert_eq!(overridden["config"]["measurement"]["duration"], 60.0);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(freqbell(&["pattern", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(freqbell(&["pattern", "--steps", "1"]).status.code(), Some(2));
    assert_eq!(freqbell(&["chsh", "eval", "--a0", "-0.3"]).status.code(), Some(2));
    assert_eq!(freqbell(&["chsh", "eval", "--crosstalk", "0.7"]).status.code(), Some(2));
    assert_eq!(freqbell(&["simulate"]).status.code(), Some(2));

    let dir = tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "bogus_key = 1\n").unwrap();
    assert_eq!(freqbell(&["chsh", "eval", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&cfg, "[dispersion]\nper_bin_overrides = { \"40\" = 1.0 }\n").unwrap();
    assert_eq!(freqbell(&["chsh", "finite", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn malformed_histogram_exits_3_with_line_number() {
    let dir = tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "# coincidence-histogram v1, bin_width_s=5e-10\nEE,0,4\nEE,1,-2\n").unwrap();
    let b = bad.to_str().unwrap();
    let out = freqbell(&["analyze", b, b, b, b]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
    assert!(stderr.contains("negative count"), "{stderr}");

    fs::write(&bad, "time,count\n1,2\n").unwrap();
    let out = freqbell(&["analyze", b, b, b, b]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let missing = dir.path().join("missing.csv");
    let m = missing.to_str().unwrap();
    assert_eq!(freqbell(&["analyze", m, m, m, m]).status.code(), Some(3));
}

#[test]
fn background_only_histograms_are_rejected() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    fs::write(&path, flat_histogram(5)).unwrap();
    let p = path.to_str().unwrap();
    let out = freqbell(&["analyze", p, p, p, p]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("non-positive net denominator"), "{stderr}");
}

#[test]
fn simulate_analyze_round_trip() {
    let dir = tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout_of(&["simulate", "--target-visibility", "0.85", "--seed", "5", "--out", d]);
    let files: Vec<String> = ["A0B0", "A0B1", "A1B0", "A1B1"]
        .iter()
        .map(|s| dir.path().join(format!("{s}.csv")).to_str().unwrap().to_string())
        .collect();
    let mut args = vec!["analyze"];
    args.extend(files.iter().map(String::as_str));
    let report = stdout_of(&args);
    let s = summary(&report);
    let (est, sigma) = (s["s"].as_f64().unwrap(), s["sigma_s"].as_f64().unwrap());

    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    let chi = record["config"]["measurement"]["crosstalk"].as_f64().unwrap();
    let target = 2.566_494_954_100_698 * (1.0 - 2.0 * chi).powi(2);
    assert!((est - target).abs() <= 3.0 * sigma, "{est} ± {sigma} vs {target}");
}

#[test]
fn counts_and_scan_records_analyze() {
    let dir = tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout_of(&["simulate", "--kind", "counts", "--out", d]);
    let records = dir.path().join("records.json");
    let report = stdout_of(&["analyze", records.to_str().unwrap()]);
    assert!(summary(&report)["s"].as_f64().unwrap() > 2.3);

    let scan = dir.path().join("scan.json");
    let scan = scan.to_str().unwrap();
    stdout_of(&["simulate", "--kind", "scan", "--target-visibility", "0.85", "--out", d]);
    let report = stdout_of(&["analyze", "--mode", "visibility", scan]);
    let eo = &summary(&report)["EO"];
    let (v, sigma) = (eo["v"].as_f64().unwrap(), eo["sigma_v"].as_f64().unwrap());
    assert!((v - 0.85).abs() <= 3.0 * sigma, "{v} ± {sigma}");

    let long = ["simulate", "--kind", "scan", "--target-visibility", "0.85", "--duration", "180000", "--out", d];
    stdout_of(&long);
    let report = stdout_of(&["analyze", "--mode", "visibility", scan]);
    let v = summary(&report)["EO"]["v"].as_f64().unwrap();
    assert!((v - 0.85).abs() <= 0.01, "{v}");
}

#[test]
fn unmodulated_pattern_is_constant() {
    let csv = stdout_of(&["pattern", "--a", "0", "--b", "0", "--steps", "7", "--model", "both"]);
    for row in rows(&csv) {
        let p: Vec<f64> = row[2..].iter().map(|x| x.parse().unwrap()).collect();
        assert_eq!(p, vec![0.5, 0.0, 0.0, 0.5]);
    }
}

#[test]
fn optimize_reports_optimal_amplitude() {
    let csv = stdout_of(&["chsh", "optimize"]);
    let r = rows(&csv);
    assert!((cell(&r, "c_star", 1) - 0.2318).abs() < 1e-3);
    assert!(cell(&r, "s_general", 1) >= 2.565);
    assert!((cell(&r, "d11_over_d00", 1) - 3.0).abs() < 0.03);
}
