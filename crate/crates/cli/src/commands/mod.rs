mod analyze;
mod chsh;
mod pattern;
mod simulate;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::Context;
use freqbell::bell::SettingQuad;
use freqbell::binspace::ModulationSetting;
use freqbell::bell::{OPTIMAL_LARGE_AMPLITUDE};
use freqbell::counts::calibrate_crosstalk;

use crate::cli::{ChshCommand, Cli, Command, Format, GlobalArgs, QuadArgs, VisibilityTarget};
use crate::config::RunConfig;
use crate::format::{pretty, Report};
use crate::{CliResult, Failure};

pub fn run(cli: Cli) -> CliResult<()> {
    let mut config = resolve_config(&cli.global)?;
    let report = match &cli.command {
        Command::Pattern(args) => pattern::run(args, &config)?,
        Command::Chsh { command } => match command {
            ChshCommand::Eval { quad, target } => {
                apply_target(target, &mut config)?;
                chsh::eval(quad, &config)?
            }
            ChshCommand::Optimize(args) => chsh::optimize(args, &config)?,
            ChshCommand::Finite { quad } => chsh::finite(quad, &config)?,
            ChshCommand::Montecarlo(args) => {
                apply_target(&args.target, &mut config)?;
                chsh::montecarlo(args, &config)?
            }
        },
        Command::Simulate(args) => {
            apply_target(&args.target, &mut config)?;
            let dir = cli
                .global
                .out
                .as_deref()
                .ok_or_else(|| Failure::usage(anyhow::anyhow!("simulate needs --out <directory>")))?;
            let report = simulate::run(args, &config, dir)?;
            write_file(&dir.join("run.json"), &pretty(&report.run_record(&config, true)))?;
            return print_report(&report, &config, cli.global.format);
        }
        Command::Analyze(args) => analyze::run(args, &config)?,
    };
    emit(&report, &config, &cli.global)
}

fn resolve_config(global: &GlobalArgs) -> CliResult<RunConfig> {
    let mut config = match &global.config {
        Some(path) => RunConfig::load(path).map_err(Failure::usage)?,
        None => RunConfig::default(),
    };
    global.apply(&mut config);
    config.validate().map_err(Failure::usage)?;
    Ok(config)
}

/// Replaces the configured crosstalk by the value that gives the requested
/// scan visibility at a = b = 0.6955.
fn apply_target(target: &VisibilityTarget, config: &mut RunConfig) -> CliResult<()> {
    if let Some(v) = target.target_visibility {
        let chi = calibrate_crosstalk(v, OPTIMAL_LARGE_AMPLITUDE, OPTIMAL_LARGE_AMPLITUDE)?;
        config.measurement.crosstalk = chi;
    }
    Ok(())
}

pub(crate) fn quad_of(args: &QuadArgs) -> CliResult<SettingQuad> {
    Ok(SettingQuad {
        a0: ModulationSetting::new(args.a0, args.alpha0)?,
        a1: ModulationSetting::new(args.a1, args.alpha1)?,
        b0: ModulationSetting::new(args.b0, args.beta0)?,
        b1: ModulationSetting::new(args.b1, args.beta1)?,
    })
}

pub(crate) const PAIR_LABELS: [(&str, &str); 4] = [("A0", "B0"), ("A0", "B1"), ("A1", "B0"), ("A1", "B1")];

fn render(report: &Report, config: &RunConfig, format: Format) -> String {
    match format {
        Format::Csv => report.to_csv(config),
        Format::Json => pretty(&report.run_record(config, true)),
    }
}

fn print_report(report: &Report, config: &RunConfig, format: Format) -> CliResult<()> {
    print!("{}", render(report, config, format));
    Ok(())
}

/// Writes the report to `--out` (plus a `.run.json` record next to CSV
/// output) or to stdout.
fn emit(report: &Report, config: &RunConfig, global: &GlobalArgs) -> CliResult<()> {
    let text = render(report, config, global.format);
    match &global.out {
        None => print_report(report, config, global.format),
        Some(path) => {
            write_file(path, &text)?;
            if global.format == Format::Csv {
                write_file(&sidecar(path), &pretty(&report.run_record(config, false)))?;
            }
            Ok(())
        }
    }
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = OsString::from(path.as_os_str());
    name.push(".run.json");
    PathBuf::from(name)
}

pub(crate) fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))
            .map_err(Failure::data)?;
    }
    std::fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::data)
}
