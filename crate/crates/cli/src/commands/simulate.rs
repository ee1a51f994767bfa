use std::f64::consts::TAU;
use std::path::Path;

use anyhow::anyhow;
use freqbell::counts::{derive_seed, simulate_scan, synthesize_histogram, CountRecord, HistogramLayout};
use serde_json::json;

use super::chsh::{detected_tables, simulate_records};
use super::{quad_of, write_file, PAIR_LABELS};
use crate::cli::{SimulateArgs, SimulateKind};
use crate::config::RunConfig;
use crate::format::{Cell, Report, Table};
use crate::{CliResult, Failure};

fn counts_row(file: &str, label: &str, record: &CountRecord) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![file.into(), label.into()];
    row.extend(record.counts.as_array().map(|n| Cell::Int(n as i64)));
    row
}

fn records_json(records: &[CountRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records serialize");
    s.push('\n');
    s
}

pub fn run(args: &SimulateArgs, config: &RunConfig, dir: &Path) -> CliResult<Report> {
    let quad = quad_of(&args.quad)?;
    let mut table = Table::new(&["file", "label", "n_ee", "n_eo", "n_oe", "n_oo"]);
    let mut parameters = json!({
        "kind": format!("{:?}", args.kind).to_lowercase(),
        "quad": serde_json::to_value(quad).expect("quad serializes"),
    });

    match args.kind {
        SimulateKind::Histogram => {
            let layout = HistogramLayout::default();
            let tables = detected_tables(&quad, config.measurement.crosstalk)?;
            for (k, p) in tables.iter().enumerate() {
                let (a, b) = PAIR_LABELS[k];
                let label = format!("{a}{b}");
                let h = synthesize_histogram(p, &config.measurement, &layout, derive_seed(config.seed, k as u64))?;
                let file = format!("{label}.csv");
                write_file(&dir.join(&file), &h.to_csv())?;
                // Peak-window totals, for orientation.
                let r = freqbell::counts::extract_counts(
                    &h,
                    layout.peak_window(),
                    layout.background_window(),
                    config.measurement.duration,
                )?;
                table.push(counts_row(&file, &label, &r));
            }
            parameters["layout"] = serde_json::to_value(layout).expect("layout serializes");
        }
        SimulateKind::Counts => {
            let records = simulate_records(&quad, config)?;
            write_file(&dir.join("records.json"), &records_json(&records))?;
            for r in &records {
                table.push(counts_row("records.json", &r.label(), r));
            }
        }
        SimulateKind::Scan => {
            if args.scan_steps < 5 {
                return Err(Failure::usage(anyhow!("--scan-steps must be >= 5")));
            }
            let alphas: Vec<f64> = (0..args.scan_steps)
                .map(|k| TAU * k as f64 / args.scan_steps as f64)
                .collect();
            let records = simulate_scan(args.scan_a, args.scan_b, args.scan_beta, &alphas, &config.measurement, config.seed)?;
            write_file(&dir.join("scan.json"), &records_json(&records))?;
            for r in &records {
                table.push(counts_row("scan.json", &r.label(), r));
            }
            parameters["scan"] = json!({
                "a": args.scan_a,
                "b": args.scan_b,
                "beta": args.scan_beta,
                "steps": args.scan_steps,
            });
        }
    }
    let summary = json!({ "crosstalk": config.measurement.crosstalk });
    Ok(Report::new("simulate", parameters, summary, table))
}
