use freqbell::bell::{chsh_finite, chsh_ideal, optimize_general, optimize_symmetric, SettingQuad};
use freqbell::closedform::{ideal_probabilities_for, ProbTable};
use freqbell::counts::{chsh_estimate, derive_seed, monte_carlo_chsh, simulate_counts, CountRecord};
use serde_json::json;

use super::{quad_of, PAIR_LABELS};
use crate::cli::{MonteCarloArgs, OptimizeArgs, QuadArgs};
use crate::config::RunConfig;
use crate::format::{Cell, Report, Table};
use crate::{CliResult, Failure};

const SETTINGS: [&str; 4] = ["A0B0", "A0B1", "A1B0", "A1B1"];

/// Closed-form probabilities of the four pairs with the configured crosstalk.
pub(crate) fn detected_tables(quad: &SettingQuad, chi: f64) -> CliResult<[ProbTable; 4]> {
    let mut out = [ProbTable::default(); 4];
    for (t, (a, b)) in out.iter_mut().zip(quad.pairs()) {
        *t = ideal_probabilities_for(&a, &b)?.with_crosstalk(chi);
    }
    Ok(out)
}

pub(crate) fn simulate_records(quad: &SettingQuad, config: &RunConfig) -> CliResult<[CountRecord; 4]> {
    let tables = detected_tables(quad, config.measurement.crosstalk)?;
    let mut records = Vec::with_capacity(4);
    for (k, p) in tables.iter().enumerate() {
        let (a, b) = PAIR_LABELS[k];
        let r = simulate_counts(p, &config.measurement, derive_seed(config.seed, k as u64))?;
        records.push(r.with_labels(a, b));
    }
    Ok(records.try_into().expect("four records"))
}

fn quad_json(quad: &SettingQuad) -> serde_json::Value {
    serde_json::to_value(quad).expect("quad serializes")
}

pub fn eval(args: &QuadArgs, config: &RunConfig) -> CliResult<Report> {
    let quad = quad_of(args)?;
    let theory = chsh_ideal(&quad)?;
    let records = simulate_records(&quad, config)?;
    let estimate = chsh_estimate(&records, true)?;

    let mut table = Table::new(&[
        "setting", "theory", "experiment", "sigma", "n_ee", "n_eo", "n_oe", "n_oo",
    ]);
    for k in 0..4 {
        let mut row: Vec<Cell> = vec![
            SETTINGS[k].into(),
            theory.correlators[k].into(),
            estimate.c_table[k].into(),
            estimate.sigma_c[k].into(),
        ];
        row.extend(records[k].counts.as_array().map(|n| Cell::Int(n as i64)));
        table.push(row);
    }
    let mut s_row: Vec<Cell> = vec!["S".into(), theory.s_value.into(), estimate.s.into(), estimate.sigma_s.into()];
    s_row.extend(std::iter::repeat_n(Cell::Text(String::new()), 4));
    table.push(s_row);

    let summary = json!({
        "s_theory": theory.s_value,
        "s_experiment": estimate.s,
        "sigma_s": estimate.sigma_s,
        "crosstalk": config.measurement.crosstalk,
    });
    Ok(Report::new("chsh eval", json!({ "quad": quad_json(&quad) }), summary, table))
}

pub fn optimize(args: &OptimizeArgs, config: &RunConfig) -> CliResult<Report> {
    let symmetric = optimize_symmetric(args.lo, args.hi, args.tolerance)?;
    if args.restarts < 1 {
        return Err(Failure::usage(anyhow::anyhow!("--restarts must be >= 1")));
    }
    let general = optimize_general(&SettingQuad::off(), args.bound, args.restarts, config.seed)?;
    let q = general.quad;
    let d = general.report.drives.map(|x| x.d);

    let mut table = Table::new(&["quantity", "value"]);
    let rows: [(&str, f64); 19] = [
        ("c_star", symmetric.c_star),
        ("s_star", symmetric.s_star),
        ("s_general", general.report.s_value),
        ("a0", q.a0.amplitude()),
        ("a1", q.a1.amplitude()),
        ("b0", q.b0.amplitude()),
        ("b1", q.b1.amplitude()),
        ("alpha0", q.a0.phase()),
        ("alpha1", q.a1.phase()),
        ("beta0", q.b0.phase()),
        ("beta1", q.b1.phase()),
        ("e00", general.report.correlators[0]),
        ("e01", general.report.correlators[1]),
        ("e10", general.report.correlators[2]),
        ("e11", general.report.correlators[3]),
        ("d00", d[0]),
        ("d01", d[1]),
        ("d10", d[2]),
        ("d11", d[3]),
    ];
    for (name, value) in rows {
        table.push(vec![name.into(), value.into()]);
    }
    let ratio = d[3] / d[0];
    table.push(vec!["d11_over_d00".into(), ratio.into()]);

    let summary = json!({
        "c_star": symmetric.c_star,
        "s_star": symmetric.s_star,
        "s_general": general.report.s_value,
        "d11_over_d00": ratio,
        "best_start": general.start,
        "quad": quad_json(&q),
    });
    let parameters = json!({
        "lo": args.lo,
        "hi": args.hi,
        "tolerance": args.tolerance,
        "restarts": args.restarts,
        "bound": args.bound,
        "initial": "zero",
    });
    Ok(Report::new("chsh optimize", parameters, summary, table))
}

pub fn finite(args: &QuadArgs, config: &RunConfig) -> CliResult<Report> {
    let quad = quad_of(args)?;
    let ideal = chsh_ideal(&quad)?;
    let profile = config.profile().map_err(Failure::usage)?;
    let modulator = config.modulator().map_err(Failure::usage)?;
    let finite = chsh_finite(&quad, &config.bins, &config.measurement, &profile, &modulator)?;

    let mut table = Table::new(&["setting", "ideal", "finite"]);
    for (k, name) in SETTINGS.iter().enumerate() {
        table.push(vec![(*name).into(), ideal.correlators[k].into(), finite.correlators[k].into()]);
    }
    table.push(vec!["S".into(), ideal.s_value.into(), finite.s_value.into()]);
    let summary = json!({
        "s_ideal": ideal.s_value,
        "s_finite": finite.s_value,
        "bins": config.bins.len(),
    });
    Ok(Report::new("chsh finite", json!({ "quad": quad_json(&quad) }), summary, table))
}

pub fn montecarlo(args: &MonteCarloArgs, config: &RunConfig) -> CliResult<Report> {
    let quad = quad_of(&args.quad)?;
    let tables = detected_tables(&quad, config.measurement.crosstalk)?;
    let summary_mc = monte_carlo_chsh(&tables, &config.measurement, args.runs, config.seed, !args.no_subtract)?;

    let mut table = Table::new(&["quantity", "value"]);
    table.push(vec!["runs".into(), summary_mc.runs.into()]);
    table.push(vec!["mean_s".into(), summary_mc.mean_s.into()]);
    table.push(vec!["std_s".into(), summary_mc.std_s.into()]);
    table.push(vec!["mean_sigma_s".into(), summary_mc.mean_sigma_s.into()]);
    for (k, c) in summary_mc.mean_c.iter().enumerate() {
        table.push(vec![format!("mean_c_{}", SETTINGS[k]).into(), (*c).into()]);
    }
    let summary = json!({
        "runs": summary_mc.runs,
        "mean_s": summary_mc.mean_s,
        "std_s": summary_mc.std_s,
        "mean_sigma_s": summary_mc.mean_sigma_s,
        "crosstalk": config.measurement.crosstalk,
        "car": config.measurement.car(),
    });
    let parameters = json!({
        "quad": quad_json(&quad),
        "runs": args.runs,
        "subtract": !args.no_subtract,
        "target_visibility": args.target.target_visibility,
    });
    Ok(Report::new("chsh montecarlo", parameters, summary, table))
}
