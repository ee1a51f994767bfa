use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::histogram::{Histogram, HistogramLayout};
use super::{CountRecord, MeasurementModel, Outcome, Outcomes};
use crate::binspace::ModulationSetting;
use crate::closedform::{ideal_probabilities_for, ProbTable};
use crate::error::Result;

/// SplitMix64 finalizer: independent, reproducible sub-seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    let draw: f64 = Poisson::new(mean)
        .expect("positive finite Poisson mean")
        .sample(rng);
    draw as u64
}

fn expected_means(probs: &ProbTable<f64>, model: &MeasurementModel<f64>) -> ([f64; 4], [f64; 4]) {
    let accidental = model.duration * model.accidental_rate / 4.0;
    let p = probs.as_array();
    let signal = p.map(|px| model.duration * model.efficiency * model.pair_rate * px);
    (signal, [accidental; 4])
}

/// Draws Poisson coincidence counts with means
/// `duration · (efficiency · pair_rate · P(x,y) + accidental_rate / 4)`.
///
/// `probs` are the detected parity probabilities: interleaver crosstalk must
/// already be folded in. The accidental means are recorded as background.
pub fn simulate_counts(
    probs: &ProbTable<f64>,
    model: &MeasurementModel<f64>,
    seed: u64,
) -> Result<CountRecord> {
    model.validate()?;
    let (signal, accidental) = expected_means(probs, model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 4];
    for outcome in Outcome::ALL {
        let i = outcome.index();
        counts[i] = poisson(&mut rng, signal[i] + accidental[i]);
    }
    Ok(CountRecord {
        setting_a: String::new(),
        setting_b: String::new(),
        duration_s: model.duration,
        counts: Outcomes::from_array(counts),
        background: Outcomes::from_array(accidental),
    })
}

/// Phase scan of Alice's modulator phase with the closed-form model:
/// one record per entry of `alphas`, crosstalk from `model` applied.
pub fn simulate_scan(
    a: f64,
    b: f64,
    beta: f64,
    alphas: &[f64],
    model: &MeasurementModel<f64>,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    let b_setting = ModulationSetting::new(b, beta)?;
    alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let a_setting = ModulationSetting::new(a, alpha)?;
            let probs = ideal_probabilities_for(&a_setting, &b_setting)?.with_crosstalk(model.crosstalk);
            Ok(simulate_counts(&probs, model, derive_seed(seed, i as u64))?
                .with_labels(format!("alpha={alpha}"), format!("beta={beta}")))
        })
        .collect()
}

/// Time-resolved coincidence histogram for one setting pair: the signal
/// forms a Gaussian peak (width `layout.jitter_bins`) normalized inside the
/// peak window, the accidentals are flat with the peak window receiving
/// `duration · accidental_rate / 4` per channel.
pub fn synthesize_histogram(
    probs: &ProbTable<f64>,
    model: &MeasurementModel<f64>,
    layout: &HistogramLayout,
    seed: u64,
) -> Result<Histogram> {
    model.validate()?;
    layout.validate()?;
    let (signal, accidental) = expected_means(probs, model);
    let peak = layout.peak_bins();
    let shape: Vec<f64> = peak
        .clone()
        .map(|k| {
            let z = (k - layout.peak_bin) as f64 / layout.jitter_bins;
            (-0.5 * z * z).exp()
        })
        .collect();
    let shape_total: f64 = shape.iter().sum();
    let per_bin_accidental = 1.0 / (peak.end - peak.start) as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = Histogram::new(layout.bin_width)?;
    for outcome in Outcome::ALL {
        let i = outcome.index();
        let counts: Vec<u64> = (layout.first_bin..layout.first_bin + layout.n_bins as i64)
            .map(|k| {
                let peak_weight = if peak.contains(&k) {
                    shape[(k - peak.start) as usize] / shape_total
                } else {
                    0.0
                };
                let mean = signal[i] * peak_weight + accidental[i] * per_bin_accidental;
                poisson(&mut rng, mean)
            })
            .collect();
        histogram.insert_channel(outcome, layout.first_bin, counts)?;
    }
    Ok(histogram)
}
