use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::simulate::{derive_seed, simulate_counts};
use super::{CountRecord, MeasurementModel, Outcome};
use crate::closedform::ProbTable;
use crate::error::{Error, Result};
use crate::specialfn::bessel_j;

/// Minimum number of scan points for [`visibility`].
pub const MIN_SCAN_POINTS: usize = 5;

/// Which anti-correlated channel a visibility is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossOutcome {
    EO,
    OE,
}

impl CrossOutcome {
    pub fn outcome(self) -> Outcome {
        match self {
            CrossOutcome::EO => Outcome::EO,
            CrossOutcome::OE => Outcome::OE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visibility {
    pub v: f64,
    pub sigma_v: f64,
    /// Scan points whose net count was negative and clamped to zero.
    pub clamped: usize,
}

/// `V = (N_max − N_min)/(N_max + N_min)` on net counts of one channel.
///
/// Negative net counts are clamped to zero. The uncertainty propagates the
/// Poisson variance of the two raw counts involved.
pub fn visibility(sweep: &[CountRecord], outcome: CrossOutcome) -> Result<Visibility> {
    if sweep.len() < MIN_SCAN_POINTS {
        return Err(Error::InsufficientData(format!(
            "visibility needs at least {MIN_SCAN_POINTS} scan points, got {}",
            sweep.len()
        )));
    }
    let idx = outcome.outcome().index();
    let mut clamped = 0;
    let points: Vec<(f64, f64)> = sweep
        .iter()
        .map(|r| {
            let net = r.net()[idx];
            if net < 0.0 {
                clamped += 1;
            }
            (net.max(0.0), r.raw()[idx])
        })
        .collect();
    if clamped > 0 {
        warn!("{clamped} scan point(s) had negative net {outcome:?} counts; clamped to 0");
    }
    let by_net = |a: &&(f64, f64), b: &&(f64, f64)| a.0.total_cmp(&b.0);
    let (n_max, raw_max) = *points.iter().max_by(by_net).expect("non-empty scan");
    let (n_min, raw_min) = *points.iter().min_by(by_net).expect("non-empty scan");
    let total = n_max + n_min;
    if !(total > 0.0) {
        return Err(Error::NonPositiveDenominator {
            label: format!("{outcome:?} scan"),
            value: total,
        });
    }
    let v = (n_max - n_min) / total;
    let d_max = 2.0 * n_min / (total * total);
    let d_min = 2.0 * n_max / (total * total);
    let sigma_v = (d_max * d_max * raw_max + d_min * d_min * raw_min).sqrt();
    Ok(Visibility { v, sigma_v, clamped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    pub s: f64,
    pub sigma_s: f64,
    /// `C_ij = N⁻/N⁺` in order 00, 01, 10, 11.
    pub c_table: [f64; 4],
    pub sigma_c: [f64; 4],
}

/// `S = C₀₀ + C₀₁ + C₁₀ − C₁₁` with `C = N⁻/N⁺`,
/// `N± = (N_EE + N_OO) ± (N_EO + N_OE)`.
///
/// With `subtract` the background is removed first; net counts stay signed.
pub fn chsh_estimate(records: &[CountRecord; 4], subtract: bool) -> Result<ChshEstimate> {
    let mut c_table = [0.0; 4];
    let mut sigma_c = [0.0; 4];
    for (k, record) in records.iter().enumerate() {
        let raw = record.raw();
        let n = if subtract { record.net() } else { raw };
        let same = n[0] + n[3];
        let cross = n[1] + n[2];
        let plus = same + cross;
        if !(plus > 0.0) {
            return Err(Error::NonPositiveDenominator {
                label: record.label(),
                value: plus,
            });
        }
        let c = (same - cross) / plus;
        let var = ((1.0 - c).powi(2) * (raw[0] + raw[3]) + (1.0 + c).powi(2) * (raw[1] + raw[2]))
            / (plus * plus);
        c_table[k] = c;
        sigma_c[k] = var.sqrt();
    }
    let s = c_table[0] + c_table[1] + c_table[2] - c_table[3];
    let sigma_s = sigma_c.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(ChshEstimate {
        s,
        sigma_s,
        c_table,
        sigma_c,
    })
}

/// Net counts of `record` divided, outcome by outcome, by the net counts of
/// a reference acquisition (typically modulation off).
pub fn normalized_net_counts(record: &CountRecord, reference: &CountRecord) -> Result<[f64; 4]> {
    let net = record.net();
    let norm = reference.net();
    let mut out = [0.0; 4];
    for o in Outcome::ALL {
        let i = o.index();
        if !(norm[i] > 0.0) {
            return Err(Error::NonPositiveDenominator {
                label: format!("reference {o}"),
                value: norm[i],
            });
        }
        out[i] = net[i] / norm[i];
    }
    Ok(out)
}

/// Summary of a seeded ensemble of CHSH estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub runs: usize,
    pub mean_s: f64,
    /// Sample standard deviation of `s` across runs.
    pub std_s: f64,
    /// Mean of the per-run propagated `sigma_s`.
    pub mean_sigma_s: f64,
    pub mean_c: [f64; 4],
}

/// Runs `runs` independent syntheses of the four setting pairs and
/// estimates S for each. Run `k` uses seeds derived from `(base_seed, k)`;
/// results are merged in run order, so the summary is reproducible
/// regardless of thread scheduling.
pub fn monte_carlo_chsh(
    probs: &[ProbTable<f64>; 4],
    model: &MeasurementModel<f64>,
    runs: usize,
    base_seed: u64,
    subtract: bool,
) -> Result<EnsembleSummary> {
    if runs < 2 {
        return Err(Error::InsufficientData("ensemble needs at least 2 runs".into()));
    }
    model.validate()?;
    let estimates: Vec<ChshEstimate> = (0..runs)
        .into_par_iter()
        .map(|k| {
            let run_seed = derive_seed(base_seed, k as u64);
            let mut records = Vec::with_capacity(4);
            for (pair, p) in probs.iter().enumerate() {
                records.push(simulate_counts(p, model, derive_seed(run_seed, pair as u64))?);
            }
            let records: [CountRecord; 4] = records.try_into().expect("four records");
            chsh_estimate(&records, subtract)
        })
        .collect::<Result<_>>()?;

    let n = runs as f64;
    let mean_s = estimates.iter().map(|e| e.s).sum::<f64>() / n;
    let var = estimates.iter().map(|e| (e.s - mean_s).powi(2)).sum::<f64>() / (n - 1.0);
    let mean_sigma_s = estimates.iter().map(|e| e.sigma_s).sum::<f64>() / n;
    let mut mean_c = [0.0; 4];
    for e in &estimates {
        for (m, c) in mean_c.iter_mut().zip(e.c_table) {
            *m += c / n;
        }
    }
    Ok(EnsembleSummary {
        runs,
        mean_s,
        std_s: var.sqrt(),
        mean_sigma_s,
        mean_c,
    })
}

const SCAN_SAMPLES: usize = 20_001;

/// Extremes of `J₀(2D)` as `α − β` sweeps a full turn, `D` running over
/// `[|a − b|, a + b]`.
fn scan_j0_range(a: f64, b: f64) -> Result<(f64, f64)> {
    let (lo, hi) = ((a - b).abs(), a + b);
    let mut j_min = f64::INFINITY;
    let mut j_max = f64::NEG_INFINITY;
    for k in 0..SCAN_SAMPLES {
        let d = lo + (hi - lo) * k as f64 / (SCAN_SAMPLES - 1) as f64;
        let j = bessel_j(0, 2.0 * d)?;
        j_min = j_min.min(j);
        j_max = j_max.max(j);
    }
    Ok((j_min, j_max))
}

/// Net-count visibility of the closed-form `P(E,O)` fringe under crosstalk
/// `chi`, as `α` sweeps a full turn at fixed `β`.
pub fn model_scan_visibility(a: f64, b: f64, chi: f64) -> Result<f64> {
    let (j_min, j_max) = scan_j0_range(a, b)?;
    let k = (1.0 - 2.0 * chi).powi(2);
    // P_eo ∝ 1 − k·J₀(2D).
    let hi = 1.0 - k * j_min;
    let lo = 1.0 - k * j_max;
    Ok((hi - lo) / (hi + lo))
}

/// Crosstalk `χ` for which [`model_scan_visibility`] equals `target`.
pub fn calibrate_crosstalk(target: f64, a: f64, b: f64) -> Result<f64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::invalid(format!("target visibility must lie in (0, 1], got {target}")));
    }
    let (j_min, j_max) = scan_j0_range(a, b)?;
    // V = k(j_max − j_min) / (2 − k(j_max + j_min))  ⇒  solve for k.
    let k = 2.0 * target / ((j_max - j_min) + target * (j_max + j_min));
    if !(k > 0.0 && k <= 1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "visibility {target} is not reachable at a = {a}, b = {b} (max {:.6})",
            model_scan_visibility(a, b, 0.0)?
        )));
    }
    Ok((1.0 - k.min(1.0).sqrt()) / 2.0)
}
