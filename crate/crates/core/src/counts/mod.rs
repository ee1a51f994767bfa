//! Coincidence-count statistics: synthetic Poisson data, histogram files,
//! windowed extraction with background estimates, and the visibility and
//! CHSH estimators with first-order Poisson error propagation.

mod estimate;
mod histogram;
mod simulate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use estimate::{
    calibrate_crosstalk, chsh_estimate, model_scan_visibility, monte_carlo_chsh, normalized_net_counts,
    visibility, ChshEstimate, CrossOutcome, EnsembleSummary, Visibility,
};
pub use histogram::{extract_counts, DelaySeries, Histogram, HistogramLayout};
pub use simulate::{derive_seed, simulate_counts, simulate_scan, synthesize_histogram};

/// Detection-side imperfections and acquisition parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasurementModel<T = f64> {
    /// Probability that an interleaver routes a photon to the wrong parity port.
    pub crosstalk: T,
    /// Overall detection efficiency of a channel pair.
    pub efficiency: T,
    /// True coincidence rate at unit efficiency (Hz).
    pub pair_rate: T,
    /// Accidental coincidence rate summed over the four outcomes (Hz).
    pub accidental_rate: T,
    /// Acquisition time per setting pair (s).
    pub duration: T,
}

impl<T: Real> Default for MeasurementModel<T> {
    fn default() -> Self {
        Self::ideal()
    }
}

impl<T: Real> MeasurementModel<T> {
    /// No crosstalk, unit efficiency, no accidentals; 1.5 Hz for 30 min.
    pub fn ideal() -> Self {
        Self {
            crosstalk: T::zero(),
            efficiency: T::one(),
            pair_rate: T::lit(1.5),
            accidental_rate: T::zero(),
            duration: T::lit(1800.0),
        }
    }

    /// 1.5 Hz coincidences with a coincidence-to-accidental ratio of 2 and
    /// 30 min per setting pair.
    pub fn experimental() -> Self {
        Self {
            accidental_rate: T::lit(0.75),
            ..Self::ideal()
        }
    }

    pub fn with_crosstalk(mut self, chi: T) -> Self {
        self.crosstalk = chi;
        self
    }

    pub fn with_duration(mut self, duration: T) -> Self {
        self.duration = duration;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let half = T::lit(0.5);
        if !(self.crosstalk >= T::zero() && self.crosstalk <= half) {
            return Err(Error::invalid(format!(
                "crosstalk must lie in [0, 0.5], got {}",
                self.crosstalk
            )));
        }
        if !(self.efficiency > T::zero() && self.efficiency <= T::one()) {
            return Err(Error::invalid(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        if !(self.pair_rate >= T::zero() && self.pair_rate.is_finite()) {
            return Err(Error::invalid("pair_rate must be finite and >= 0"));
        }
        if !(self.accidental_rate >= T::zero() && self.accidental_rate.is_finite()) {
            return Err(Error::invalid("accidental_rate must be finite and >= 0"));
        }
        if !(self.duration > T::zero() && self.duration.is_finite()) {
            return Err(Error::invalid("duration must be finite and > 0"));
        }
        Ok(())
    }

    /// Coincidence-to-accidental ratio at unit efficiency.
    pub fn car(&self) -> T {
        self.efficiency * self.pair_rate / self.accidental_rate
    }
}

/// Parity-flip probability of an interleaver with extinction ratio `db`.
pub fn crosstalk_from_extinction_db(db: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(db / 10.0))
}

/// One of the four parity coincidence channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    EE,
    EO,
    OE,
    OO,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::EE, Outcome::EO, Outcome::OE, Outcome::OO];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::EE => "EE",
            Outcome::EO => "EO",
            Outcome::OE => "OE",
            Outcome::OO => "OO",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "EE" => Ok(Outcome::EE),
            "EO" => Ok(Outcome::EO),
            "OE" => Ok(Outcome::OE),
            "OO" => Ok(Outcome::OO),
            other => Err(format!("unknown channel pair {other:?}")),
        }
    }
}

/// One value per outcome, serialized with keys `EE`, `EO`, `OE`, `OO`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Outcomes<V> {
    #[serde(rename = "EE")]
    pub ee: V,
    #[serde(rename = "EO")]
    pub eo: V,
    #[serde(rename = "OE")]
    pub oe: V,
    #[serde(rename = "OO")]
    pub oo: V,
}

impl<V: Copy> Outcomes<V> {
    pub fn from_array(v: [V; 4]) -> Self {
        Self {
            ee: v[0],
            eo: v[1],
            oe: v[2],
            oo: v[3],
        }
    }

    pub fn as_array(&self) -> [V; 4] {
        [self.ee, self.eo, self.oe, self.oo]
    }

    pub fn get(&self, outcome: Outcome) -> V {
        self.as_array()[outcome.index()]
    }
}

/// Coincidence counts for one setting pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting_a: String,
    pub setting_b: String,
    pub duration_s: f64,
    pub counts: Outcomes<u64>,
    /// Expected accidentals per outcome; subtracted by the estimators.
    pub background: Outcomes<f64>,
}

impl CountRecord {
    pub fn with_labels(mut self, setting_a: impl Into<String>, setting_b: impl Into<String>) -> Self {
        self.setting_a = setting_a.into();
        self.setting_b = setting_b.into();
        self
    }

    /// `setting_a/setting_b`, or `?` when unlabeled.
    pub fn label(&self) -> String {
        if self.setting_a.is_empty() && self.setting_b.is_empty() {
            "?".to_string()
        } else {
            format!("{}/{}", self.setting_a, self.setting_b)
        }
    }

    pub fn raw(&self) -> [f64; 4] {
        self.counts.as_array().map(|n| n as f64)
    }

    /// Signed `raw − background`.
    pub fn net(&self) -> [f64; 4] {
        let raw = self.raw();
        let bg = self.background.as_array();
        [raw[0] - bg[0], raw[1] - bg[1], raw[2] - bg[2], raw[3] - bg[3]]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("count record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if record.background.as_array().iter().any(|b| !(*b >= 0.0)) {
            return Err(Error::invalid("background must be >= 0"));
        }
        Ok(record)
    }
}
