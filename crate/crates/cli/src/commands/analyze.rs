use std::path::Path;

use anyhow::{anyhow, Context};
use freqbell::counts::{
    chsh_estimate, extract_counts, visibility, CountRecord, CrossOutcome, Histogram, HistogramLayout,
};
use serde_json::{json, Value};

use crate::cli::{AnalyzeArgs, AnalyzeMode};
use crate::config::RunConfig;
use crate::format::{Cell, Report, Table};
use crate::{CliResult, Failure};

fn window(values: &Option<Vec<f64>>, default: (f64, f64), flag: &str) -> CliResult<(f64, f64)> {
    match values.as_deref() {
        None => Ok(default),
        Some([t0, t1]) => Ok((*t0, *t1)),
        Some(_) => Err(Failure::usage(anyhow!("--{flag} takes `start,end`"))),
    }
}

fn data_error(path: &Path, e: impl Into<anyhow::Error>) -> Failure {
    Failure::data(e.into().context(format!("{}", path.display())))
}

fn load(path: &Path, peak: (f64, f64), background: (f64, f64), duration: f64) -> CliResult<Vec<CountRecord>> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let text = std::fs::read_to_string(path)
            .context("cannot read file")
            .map_err(|e| data_error(path, e))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| data_error(path, freqbell::Error::Parse { line: e.line(), message: e.to_string() }))?;
        let items = match value {
            Value::Array(items) => items,
            other => vec![other],
        };
        return items
            .into_iter()
            .map(|v| CountRecord::from_json(&v.to_string()).map_err(|e| data_error(path, e)))
            .collect();
    }
    let file = std::fs::File::open(path)
        .context("cannot open file")
        .map_err(|e| data_error(path, e))?;
    let histogram = Histogram::parse(file).map_err(|e| data_error(path, e))?;
    let record = extract_counts(&histogram, peak, background, duration).map_err(|e| match e {
        freqbell::Error::InvalidArgument(_) => Failure::usage(e),
        _ => data_error(path, e),
    })?;
    Ok(vec![record])
}

pub fn run(args: &AnalyzeArgs, config: &RunConfig) -> CliResult<Report> {
    let layout = HistogramLayout::default();
    let peak = window(&args.peak, layout.peak_window(), "peak")?;
    let background = window(&args.background, layout.background_window(), "background")?;

    let mut records = Vec::new();
    let mut names = Vec::new();
    for path in &args.files {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let loaded = load(path, peak, background, config.measurement.duration)?;
        let several = loaded.len() > 1;
        for (i, r) in loaded.into_iter().enumerate() {
            names.push(if several { format!("{stem}[{i}]") } else { stem.clone() });
            records.push(r);
        }
    }
    if let Some(labels) = &args.labels {
        if labels.len() != records.len() {
            return Err(Failure::usage(anyhow!(
                "{} labels given for {} records",
                labels.len(),
                records.len()
            )));
        }
        names = labels.clone();
    }
    for (r, name) in records.iter_mut().zip(&names) {
        if r.setting_a.is_empty() && r.setting_b.is_empty() {
            r.setting_a = name.clone();
        }
    }

    let subtract = !args.no_subtract;
    let parameters = json!({
        "files": args.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "mode": format!("{:?}", args.mode).to_lowercase(),
        "peak_window": [peak.0, peak.1],
        "background_window": [background.0, background.1],
        "subtract": subtract,
    });

    match args.mode {
        AnalyzeMode::Chsh => {
            let four: [CountRecord; 4] = records.clone().try_into().map_err(|_| {
                Failure::usage(anyhow!("chsh analysis needs exactly 4 records, got {}", records.len()))
            })?;
            let estimate = chsh_estimate(&four, subtract)?;
            let mut table = Table::new(&["setting", "c", "sigma_c", "n_ee", "n_eo", "n_oe", "n_oo"]);
            for k in 0..4 {
                let mut row: Vec<Cell> = vec![
                    names[k].clone().into(),
                    estimate.c_table[k].into(),
                    estimate.sigma_c[k].into(),
                ];
                row.extend(four[k].counts.as_array().map(|n| Cell::Int(n as i64)));
                table.push(row);
            }
            let mut s_row: Vec<Cell> = vec!["S".into(), estimate.s.into(), estimate.sigma_s.into()];
            s_row.extend(std::iter::repeat_n(Cell::Text(String::new()), 4));
            table.push(s_row);
            let summary = json!({ "s": estimate.s, "sigma_s": estimate.sigma_s });
            Ok(Report::new("analyze chsh", parameters, summary, table))
        }
        AnalyzeMode::Visibility => {
            let mut table = Table::new(&["outcome", "v", "sigma_v", "clamped"]);
            let mut summary = json!({});
            for outcome in [CrossOutcome::EO, CrossOutcome::OE] {
                let v = visibility(&records, outcome)?;
                let name = format!("{outcome:?}");
                table.push(vec![name.as_str().into(), v.v.into(), v.sigma_v.into(), v.clamped.into()]);
                summary[name] = json!({ "v": v.v, "sigma_v": v.sigma_v });
            }
            Ok(Report::new("analyze visibility", parameters, summary, table))
        }
    }
}
