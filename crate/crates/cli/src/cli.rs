use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use freqbell::bell::{OPTIMAL_LARGE_AMPLITUDE, OPTIMAL_SMALL_AMPLITUDE};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "freqbell",
    version,
    about = "Frequency-bin entanglement: interference patterns, CHSH tests and coincidence statistics",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (a directory for `simulate`). Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// RF bin spacing Ω in Hz.
    #[arg(long, global = true)]
    pub rf_frequency: Option<f64>,
    /// Center frequency ω₀/2π in Hz.
    #[arg(long, global = true)]
    pub center_frequency: Option<f64>,
    /// Arm-A bins of the correlated state: a comma list, ranges allowed,
    /// e.g. `1..6` or `-20..20` or `1,3,5`.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_bins)]
    pub bins: Option<BinList>,
    /// Truncation tolerance on the Bessel tail.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub max_order: Option<usize>,
    /// Interleaver parity-flip probability χ.
    #[arg(long, global = true, conflicts_with = "extinction_db")]
    pub crosstalk: Option<f64>,
    /// Interleaver extinction ratio (dB), converted to χ.
    #[arg(long, global = true)]
    pub extinction_db: Option<f64>,
    #[arg(long, global = true)]
    pub efficiency: Option<f64>,
    /// True coincidence rate (Hz).
    #[arg(long, global = true)]
    pub pair_rate: Option<f64>,
    /// Accidental coincidence rate over all four outcomes (Hz).
    #[arg(long, global = true)]
    pub accidental_rate: Option<f64>,
    /// Acquisition time per setting pair (s).
    #[arg(long, global = true)]
    pub duration: Option<f64>,
    /// Quadratic dispersion coefficient (rad per bin²).
    #[arg(long, global = true)]
    pub dispersion: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinList(pub Vec<i64>);

fn parse_bins(text: &str) -> Result<BinList, String> {
    let mut bins = Vec::new();
    for item in text.split(',').map(str::trim) {
        let number = |s: &str| s.trim().parse::<i64>().map_err(|_| format!("bad bin {s:?}"));
        match item.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (number(lo)?, number(hi)?);
                if lo > hi {
                    return Err(format!("empty bin range {item:?}"));
                }
                bins.extend(lo..=hi);
            }
            None => bins.push(number(item)?),
        }
    }
    Ok(BinList(bins))
}

impl GlobalArgs {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.rf_frequency {
            config.rf_frequency = v;
        }
        if let Some(v) = self.center_frequency {
            config.center_frequency = v;
        }
        if let Some(v) = &self.bins {
            config.bins.clone_from(&v.0);
        }
        if let Some(v) = self.epsilon {
            config.truncation.epsilon = v;
        }
        if let Some(v) = self.max_order {
            config.truncation.max_order = v;
        }
        if let Some(v) = self.crosstalk {
            config.measurement.crosstalk = v;
        }
        if let Some(db) = self.extinction_db {
            config.measurement.crosstalk = freqbell::counts::crosstalk_from_extinction_db(db);
        }
        if let Some(v) = self.efficiency {
            config.measurement.efficiency = v;
        }
        if let Some(v) = self.pair_rate {
            config.measurement.pair_rate = v;
        }
        if let Some(v) = self.accidental_rate {
            config.measurement.accidental_rate = v;
        }
        if let Some(v) = self.duration {
            config.measurement.duration = v;
        }
        if let Some(v) = self.dispersion {
            config.dispersion.quadratic_coefficient = v;
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coincidence probabilities as Alice's phase α is swept.
    Pattern(PatternArgs),
    /// CHSH evaluation and optimization.
    Chsh {
        #[command(subcommand)]
        command: ChshCommand,
    },
    /// Synthesize coincidence data for the four CHSH setting pairs, or a phase scan.
    Simulate(SimulateArgs),
    /// Estimate CHSH or visibility from histogram CSV or count-record JSON files.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternModel {
    Ideal,
    Finite,
    Both,
}

#[derive(Debug, Args)]
pub struct PatternArgs {
    #[arg(long, default_value_t = OPTIMAL_LARGE_AMPLITUDE)]
    pub a: f64,
    #[arg(long, default_value_t = OPTIMAL_LARGE_AMPLITUDE)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = TAU)]
    pub alpha_max: f64,
    /// Number of sweep points, endpoints included.
    #[arg(long, default_value_t = 73)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = PatternModel::Ideal)]
    pub model: PatternModel,
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    #[arg(long, default_value_t = OPTIMAL_SMALL_AMPLITUDE)]
    pub a0: f64,
    #[arg(long, default_value_t = OPTIMAL_LARGE_AMPLITUDE)]
    pub a1: f64,
    #[arg(long, default_value_t = OPTIMAL_SMALL_AMPLITUDE)]
    pub b0: f64,
    #[arg(long, default_value_t = OPTIMAL_LARGE_AMPLITUDE)]
    pub b1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub alpha0: f64,
    #[arg(long, default_value_t = PI)]
    pub alpha1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta0: f64,
    #[arg(long, default_value_t = PI)]
    pub beta1: f64,
}

#[derive(Debug, Clone, Args)]
pub struct VisibilityTarget {
    /// Calibrate χ so the a = b = 0.6955 scan visibility equals this value.
    #[arg(long)]
    pub target_visibility: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ChshCommand {
    /// Table I style report: closed-form theory and one simulated acquisition.
    Eval {
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        target: VisibilityTarget,
    },
    /// Symmetric golden-section optimum and multi-start general optimum.
    Optimize(OptimizeArgs),
    /// Finite-bin simulation over the configured bins.
    Finite {
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Seeded ensemble of simulated CHSH experiments.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 0.5)]
    pub hi: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Starts for the general optimizer, the reference optimum included.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1.5)]
    pub bound: f64,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub target: VisibilityTarget,
    #[arg(long, default_value_t = 500)]
    pub runs: usize,
    /// Estimate from raw counts without background subtraction.
    #[arg(long)]
    pub no_subtract: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimulateKind {
    /// Four delay histograms, one per setting pair.
    Histogram,
    /// Four count records.
    Counts,
    /// Count records for a sweep of Alice's phase.
    Scan,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub quad: QuadArgs,
    #[command(flatten)]
    pub target: VisibilityTarget,
    #[arg(long, value_enum, default_value_t = SimulateKind::Histogram)]
    pub kind: SimulateKind,
    #[arg(long, default_value_t = OPTIMAL_LARGE_AMPLITUDE)]
    pub scan_a: f64,
    #[arg(long, default_value_t = OPTIMAL_LARGE_AMPLITUDE)]
    pub scan_b: f64,
    #[arg(long, default_value_t = 0.0)]
    pub scan_beta: f64,
    #[arg(long, default_value_t = 36)]
    pub scan_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeMode {
    Chsh,
    Visibility,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Histogram CSV (`.csv`) or count-record JSON (`.json`) files. For
    /// `chsh`, four setting pairs in the order A0B0, A0B1, A1B0, A1B1.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = AnalyzeMode::Chsh)]
    pub mode: AnalyzeMode,
    /// Coincidence peak window `start,end` in seconds.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub peak: Option<Vec<f64>>,
    /// Background window `start,end` in seconds.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub background: Option<Vec<f64>>,
    /// Labels for the inputs, in file order.
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<String>>,
    /// Use raw counts without background subtraction.
    #[arg(long)]
    pub no_subtract: bool,
}
