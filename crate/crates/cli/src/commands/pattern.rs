use anyhow::anyhow;
use freqbell::binspace::{finite_probabilities, ModulationSetting};
use freqbell::closedform::{ideal_probabilities_for, ProbTable};
use rayon::prelude::*;
use serde_json::json;

use crate::cli::{PatternArgs, PatternModel};
use crate::config::RunConfig;
use crate::format::{Report, Table};
use crate::{CliResult, Failure};

pub fn run(args: &PatternArgs, config: &RunConfig) -> CliResult<Report> {
    if args.steps < 2 {
        return Err(Failure::usage(anyhow!("--steps must be >= 2, got {}", args.steps)));
    }
    if !(args.alpha_min.is_finite() && args.alpha_max.is_finite() && args.alpha_max > args.alpha_min) {
        return Err(Failure::usage(anyhow!(
            "invalid alpha range [{}, {}]",
            args.alpha_min,
            args.alpha_max
        )));
    }
    let b = ModulationSetting::new(args.b, args.beta)?;
    let span = args.alpha_max - args.alpha_min;
    let alphas: Vec<f64> = (0..args.steps)
        .map(|k| args.alpha_min + span * k as f64 / (args.steps - 1) as f64)
        .collect();
    let settings = alphas
        .iter()
        .map(|&alpha| ModulationSetting::new(args.a, alpha))
        .collect::<freqbell::Result<Vec<_>>>()?;

    let want_ideal = args.model != PatternModel::Finite;
    let want_finite = args.model != PatternModel::Ideal;
    let chi = config.measurement.crosstalk;

    let ideal: Vec<ProbTable> = if want_ideal {
        settings
            .iter()
            .map(|a| Ok(ideal_probabilities_for(a, &b)?.with_crosstalk(chi)))
            .collect::<freqbell::Result<_>>()?
    } else {
        Vec::new()
    };
    let finite: Vec<ProbTable> = if want_finite {
        let profile = config.profile().map_err(Failure::usage)?;
        let modulator = config.modulator().map_err(Failure::usage)?;
        settings
            .par_iter()
            .map(|a| finite_probabilities(&config.bins, a, &b, &config.measurement, &profile, &modulator))
            .collect::<freqbell::Result<_>>()?
    } else {
        Vec::new()
    };

    let mut table = Table::new(&["alpha", "model", "p_ee", "p_eo", "p_oe", "p_oo"]);
    let mut row = |alpha: f64, model: &str, p: &ProbTable| {
        let mut cells = vec![alpha.into(), model.into()];
        cells.extend(p.as_array().map(Into::into));
        table.push(cells);
    };
    for (k, &alpha) in alphas.iter().enumerate() {
        if want_ideal {
            row(alpha, "ideal", &ideal[k]);
        }
        if want_finite {
            row(alpha, "finite", &finite[k]);
        }
    }

    let max_total_error = |tables: &[ProbTable]| {
        tables.iter().map(|t| (t.total() - 1.0).abs()).fold(0.0, f64::max)
    };
    let mut summary = json!({ "points": args.steps });
    if want_ideal {
        summary["ideal_max_total_error"] = json!(max_total_error(&ideal));
    }
    if want_finite {
        summary["finite_max_total_error"] = json!(max_total_error(&finite));
    }
    if want_ideal && want_finite {
        let gap = ideal
            .iter()
            .zip(&finite)
            .map(|(i, f)| i.max_abs_diff(f))
            .fold(0.0, f64::max);
        summary["max_gap"] = json!(gap);
    }
    let parameters = json!({
        "a": args.a,
        "b": args.b,
        "beta": args.beta,
        "alpha_min": args.alpha_min,
        "alpha_max": args.alpha_max,
        "steps": args.steps,
        "model": format!("{:?}", args.model).to_lowercase(),
    });
    Ok(Report::new("pattern", parameters, summary, table))
}
