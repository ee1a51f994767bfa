use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use freqbell::binspace::{DispersionProfile, ModulatorConfig};
use freqbell::counts::MeasurementModel;
use freqbell::specialfn::TruncationPolicy;
use serde::{Deserialize, Serialize};

/// Resolved run configuration. Loaded from a TOML file, then overridden by
/// command-line flags.
///
/// ```toml
/// rf_frequency = 25e9
/// center_frequency = 193.125e12
/// bins = [1, 2, 3, 4, 5, 6]
/// seed = 1
///
/// [truncation]
/// epsilon = 1e-12
/// max_order = 64
///
/// [measurement]
/// crosstalk = 0.0
/// efficiency = 1.0
/// pair_rate = 1.5
/// accidental_rate = 0.75
/// duration = 1800.0
///
/// [dispersion]
/// quadratic_coefficient = 0.0
/// per_bin_overrides = { "2" = 3.141592653589793 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Bin spacing Ω (Hz). Metadata only.
    pub rf_frequency: f64,
    /// ω₀/2π (Hz). Metadata only.
    pub center_frequency: f64,
    pub bins: Vec<i64>,
    pub seed: u64,
    pub truncation: TruncationConfig,
    pub measurement: MeasurementModel,
    pub dispersion: DispersionConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationConfig {
    pub epsilon: f64,
    pub max_order: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    /// Phase per squared bin index (rad).
    pub quadratic_coefficient: f64,
    /// Bin index (as a string key) to phase (rad).
    pub per_bin_overrides: BTreeMap<String, f64>,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        let policy = TruncationPolicy::<f64>::default();
        Self {
            epsilon: policy.epsilon,
            max_order: policy.max_order,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rf_frequency: 25e9,
            center_frequency: 193.125e12,
            bins: (1..=6).collect(),
            seed: 1,
            truncation: TruncationConfig::default(),
            measurement: MeasurementModel::experimental(),
            dispersion: DispersionConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.rf_frequency > 0.0 && self.rf_frequency.is_finite()) {
            bail!("rf_frequency must be > 0, got {}", self.rf_frequency);
        }
        if !(self.center_frequency > 0.0 && self.center_frequency.is_finite()) {
            bail!("center_frequency must be > 0, got {}", self.center_frequency);
        }
        if self.bins.is_empty() {
            bail!("bins must not be empty");
        }
        self.policy()?;
        self.measurement.validate()?;
        self.profile()?;
        Ok(())
    }

    pub fn policy(&self) -> anyhow::Result<TruncationPolicy> {
        Ok(TruncationPolicy::new(self.truncation.epsilon, self.truncation.max_order)?)
    }

    pub fn modulator(&self) -> anyhow::Result<ModulatorConfig> {
        Ok(ModulatorConfig::with_truncation(self.policy()?))
    }

    /// Overrides must name bins of the active window on either arm.
    pub fn profile(&self) -> anyhow::Result<DispersionProfile> {
        let mut profile = DispersionProfile::quadratic(self.dispersion.quadratic_coefficient);
        for (key, &phase) in &self.dispersion.per_bin_overrides {
            let bin: i64 = key
                .trim()
                .parse()
                .with_context(|| format!("dispersion override key {key:?} is not a bin index"))?;
            if !self.bins.contains(&bin) && !self.bins.contains(&-bin) {
                bail!("dispersion override for bin {bin} lies outside the active bins");
            }
            profile = profile.with_override(bin, phase);
        }
        Ok(profile)
    }
}
