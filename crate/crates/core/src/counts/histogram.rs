//! Relative-delay coincidence histograms and the `coincidence-histogram v1`
//! CSV format:
//!
//! ```text
//! # coincidence-histogram v1, bin_width_s=5e-10
//! EE,0,3
//! EE,1,4
//! ...
//! ```
//!
//! Rows are `channel_pair,delay_bin_index,count`. Within one channel the
//! delay bins must be consecutive and increasing. Delay bin `k` covers
//! `[k·w, (k+1)·w)` seconds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{CountRecord, Outcome, Outcomes};
use crate::error::{Error, Result};

const HEADER_PREFIX: &str = "# coincidence-histogram v1";

/// Contiguous run of delay-bin counts starting at `first_bin`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelaySeries {
    pub first_bin: i64,
    pub counts: Vec<u64>,
}

impl DelaySeries {
    pub fn end_bin(&self) -> i64 {
        self.first_bin + self.counts.len() as i64
    }

    pub fn get(&self, bin: i64) -> Option<u64> {
        if bin < self.first_bin {
            return None;
        }
        self.counts.get((bin - self.first_bin) as usize).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    bin_width: f64,
    channels: BTreeMap<Outcome, DelaySeries>,
}

impl Histogram {
    pub fn new(bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::invalid(format!("bin width must be > 0, got {bin_width}")));
        }
        Ok(Self {
            bin_width,
            channels: BTreeMap::new(),
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn channel(&self, outcome: Outcome) -> Option<&DelaySeries> {
        self.channels.get(&outcome)
    }

    pub fn channels(&self) -> impl Iterator<Item = (Outcome, &DelaySeries)> {
        self.channels.iter().map(|(k, v)| (*k, v))
    }

    pub fn insert_channel(&mut self, outcome: Outcome, first_bin: i64, counts: Vec<u64>) -> Result<()> {
        if counts.is_empty() {
            return Err(Error::invalid(format!("channel {outcome} has no delay bins")));
        }
        self.channels.insert(outcome, DelaySeries { first_bin, counts });
        Ok(())
    }

    /// Delay span `[first, end)` in seconds covered by all channels.
    pub fn coincidence_window(&self) -> (f64, f64) {
        let first = self.channels.values().map(|s| s.first_bin).min().unwrap_or(0);
        let end = self.channels.values().map(|s| s.end_bin()).max().unwrap_or(0);
        (first as f64 * self.bin_width, end as f64 * self.bin_width)
    }

    /// Parses the CSV format. Errors name the offending (1-based) line.
    pub fn parse<R: Read>(source: R) -> Result<Self> {
        let reader = BufReader::new(source);
        let mut lines = reader.lines().enumerate();
        let io_err = |line: usize, e: std::io::Error| Error::Parse {
            line,
            message: e.to_string(),
        };

        let header = loop {
            match lines.next() {
                Some((i, line)) => {
                    let line = line.map_err(|e| io_err(i + 1, e))?;
                    if !line.trim().is_empty() {
                        break (i + 1, line);
                    }
                }
                None => {
                    return Err(Error::Parse {
                        line: 1,
                        message: "missing header".into(),
                    })
                }
            }
        };
        let bin_width = parse_header(&header.1).map_err(|message| Error::Parse {
            line: header.0,
            message,
        })?;
        let mut histogram = Histogram::new(bin_width).map_err(|e| Error::Parse {
            line: header.0,
            message: e.to_string(),
        })?;

        for (i, line) in lines {
            let number = i + 1;
            let line = line.map_err(|e| io_err(number, e))?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fail = |message: String| Error::Parse {
                line: number,
                message,
            };
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(fail(format!("expected 3 fields, found {}", fields.len())));
            }
            let outcome: Outcome = fields[0].parse().map_err(fail)?;
            let bin: i64 = fields[1]
                .parse()
                .map_err(|_| fail(format!("bad delay bin index {:?}", fields[1])))?;
            let count: i64 = fields[2]
                .parse()
                .map_err(|_| fail(format!("bad count {:?}", fields[2])))?;
            if count < 0 {
                return Err(fail(format!("negative count {count}")));
            }
            match histogram.channels.get_mut(&outcome) {
                None => {
                    histogram.channels.insert(
                        outcome,
                        DelaySeries {
                            first_bin: bin,
                            counts: vec![count as u64],
                        },
                    );
                }
                Some(series) => {
                    let expected = series.end_bin();
                    if bin != expected {
                        return Err(fail(format!(
                            "non-monotone delay bins for {outcome}: expected {expected}, found {bin}"
                        )));
                    }
                    series.counts.push(count as u64);
                }
            }
        }
        Ok(histogram)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::parse(bytes)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{HEADER_PREFIX}, bin_width_s={:?}\n", self.bin_width);
        for (outcome, series) in &self.channels {
            for (k, count) in series.counts.iter().enumerate() {
                let _ = writeln!(out, "{outcome},{},{count}", series.first_bin + k as i64);
            }
        }
        out
    }
}

fn parse_header(line: &str) -> std::result::Result<f64, String> {
    let rest = line
        .trim()
        .strip_prefix(HEADER_PREFIX)
        .ok_or_else(|| format!("bad header, expected {HEADER_PREFIX:?}"))?;
    let value = rest
        .trim()
        .strip_prefix(',')
        .map(str::trim)
        .and_then(|s| s.strip_prefix("bin_width_s="))
        .ok_or_else(|| "bad header, expected `bin_width_s=<float>`".to_string())?;
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("bad bin width {value:?}"))
}

/// Geometry used by [`super::synthesize_histogram`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramLayout {
    pub bin_width: f64,
    pub first_bin: i64,
    pub n_bins: usize,
    /// Delay bin at the center of the coincidence peak.
    pub peak_bin: i64,
    /// Peak window spans `peak_bin ± peak_half_width`.
    pub peak_half_width: usize,
    /// Gaussian width of the peak, in bins.
    pub jitter_bins: f64,
}

impl Default for HistogramLayout {
    /// 0.5 ns bins over 100 ns with the peak window at 50 ns ± 2 ns.
    fn default() -> Self {
        Self {
            bin_width: 0.5e-9,
            first_bin: 0,
            n_bins: 200,
            peak_bin: 100,
            peak_half_width: 4,
            jitter_bins: 1.2,
        }
    }
}

impl HistogramLayout {
    pub fn validate(&self) -> Result<()> {
        if !(self.bin_width > 0.0) || !(self.jitter_bins > 0.0) {
            return Err(Error::invalid("bin width and jitter must be > 0"));
        }
        let peak = self.peak_bins();
        if peak.start < self.first_bin || peak.end > self.first_bin + self.n_bins as i64 {
            return Err(Error::invalid("peak window does not fit in the histogram"));
        }
        Ok(())
    }

    pub fn peak_bins(&self) -> Range<i64> {
        let h = self.peak_half_width as i64;
        self.peak_bin - h..self.peak_bin + h + 1
    }

    /// Peak window in seconds.
    pub fn peak_window(&self) -> (f64, f64) {
        let r = self.peak_bins();
        (r.start as f64 * self.bin_width, r.end as f64 * self.bin_width)
    }

    /// Off-peak window: every bin from the start of the histogram up to
    /// 10 bins before the peak window.
    pub fn background_window(&self) -> (f64, f64) {
        let end = self.peak_bins().start - 10;
        (self.first_bin as f64 * self.bin_width, end as f64 * self.bin_width)
    }
}

fn bins_in(window: (f64, f64), bin_width: f64) -> Range<i64> {
    // Bins whose centers lie in [t0, t1).
    let start = (window.0 / bin_width - 0.5).ceil() as i64;
    let end = (window.1 / bin_width - 0.5).ceil() as i64;
    start..end.max(start)
}

/// Sums each channel over `peak_window`; the background estimate is the
/// `background_window` sum scaled by the ratio of bin counts. Raw integers
/// are kept, subtraction happens in the estimators.
pub fn extract_counts(
    h: &Histogram,
    peak_window: (f64, f64),
    background_window: (f64, f64),
    duration_s: f64,
) -> Result<CountRecord> {
    for w in [peak_window, background_window] {
        if !(w.0 < w.1) {
            return Err(Error::invalid(format!("window {w:?} is empty")));
        }
    }
    if peak_window.0 < background_window.1 && background_window.0 < peak_window.1 {
        return Err(Error::OverlappingWindows {
            peak: peak_window,
            background: background_window,
        });
    }
    let span = h.coincidence_window();
    let slack = 1e-9 * h.bin_width();
    for w in [peak_window, background_window] {
        if w.0 < span.0 - slack || w.1 > span.1 + slack {
            return Err(Error::WindowOutsideSpan { window: w, span });
        }
    }
    let peak = bins_in(peak_window, h.bin_width());
    let background = bins_in(background_window, h.bin_width());
    if peak.is_empty() || background.is_empty() {
        return Err(Error::invalid("a window contains no bin centers"));
    }
    let ratio = (peak.end - peak.start) as f64 / (background.end - background.start) as f64;

    let mut counts = [0u64; 4];
    let mut bg = [0f64; 4];
    for outcome in Outcome::ALL {
        let series = h
            .channel(outcome)
            .ok_or_else(|| Error::InsufficientData(format!("histogram has no {outcome} channel")))?;
        let sum = |range: Range<i64>| -> Result<u64> {
            range
                .map(|k| {
                    series.get(k).ok_or_else(|| {
                        Error::InsufficientData(format!("{outcome} channel lacks delay bin {k}"))
                    })
                })
                .sum()
        };
        counts[outcome.index()] = sum(peak.clone())?;
        bg[outcome.index()] = sum(background.clone())? as f64 * ratio;
    }
    Ok(CountRecord {
        setting_a: String::new(),
        setting_b: String::new(),
        duration_s,
        counts: Outcomes::from_array(counts),
        background: Outcomes::from_array(bg),
    })
}
