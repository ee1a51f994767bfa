use freqbell::bell::{chsh_ideal, SettingQuad};
use freqbell::closedform::{ideal_probabilities_for, ProbTable};
use freqbell::counts::{
    calibrate_crosstalk, chsh_estimate, derive_seed, extract_counts, model_scan_visibility,
    monte_carlo_chsh, simulate_counts, simulate_scan, synthesize_histogram, visibility,
    CountRecord, CrossOutcome, Histogram, HistogramLayout, MeasurementModel, Outcome, Outcomes,
};
use freqbell::Error;
use proptest::prelude::*;

fn optimum_tables(chi: f64) -> [ProbTable; 4] {
    SettingQuad::<f64>::reference_optimum()
        .pairs()
        .map(|(a, b)| ideal_probabilities_for(&a, &b).unwrap().with_crosstalk(chi))
}

fn records(tables: &[ProbTable; 4], model: &MeasurementModel, seed: u64) -> [CountRecord; 4] {
    let mut k = 0;
    tables.map(|p| {
        k += 1;
        simulate_counts(&p, model, derive_seed(seed, k)).unwrap()
    })
}

fn record(counts: [u64; 4]) -> CountRecord {
    CountRecord {
        setting_a: "A".into(),
        setting_b: "B".into(),
        duration_s: 1.0,
        counts: Outcomes::from_array(counts),
        background: Outcomes::from_array([0.0; 4]),
    }
}

#[test]
fn estimator_converges_with_duration() {
    let model = MeasurementModel::experimental();
    let target = chsh_ideal(&SettingQuad::<f64>::reference_optimum()).unwrap().s_value;
    let tables = optimum_tables(0.0);
    let short = chsh_estimate(&records(&tables, &model, 5), true).unwrap();
    let long_model = model.with_duration(model.duration * 1e4);
    let long = chsh_estimate(&records(&tables, &long_model, 5), true).unwrap();
    assert!((long.s - target).abs() <= 3.0 * long.sigma_s, "{} ± {}", long.s, long.sigma_s);
    assert!(long.sigma_s < short.sigma_s / 50.0);
}

#[test]
fn background_subtraction_is_unbiased() {
    let model = MeasurementModel::experimental();
    let probs = ProbTable::new(0.4, 0.1, 0.1, 0.4);
    let seeds = 200;
    let nets: Vec<[f64; 4]> = (0..seeds)
        .map(|s| simulate_counts(&probs, &model, s).unwrap().net())
        .collect();
    for o in Outcome::ALL {
        let i = o.index();
        let signal = model.duration * model.efficiency * model.pair_rate * probs.as_array()[i];
        let mean = nets.iter().map(|n| n[i]).sum::<f64>() / seeds as f64;
        let var = nets.iter().map(|n| (n[i] - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64;
        let stderr = (var / seeds as f64).sqrt();
        assert!((mean - signal).abs() <= 3.0 * stderr, "{o}: {mean} vs {signal} ± {stderr}");
    }
}

#[test]
fn empirical_car() {
    let model = MeasurementModel::experimental().with_duration(1e7);
    let r = simulate_counts(&ProbTable::new(0.25, 0.25, 0.25, 0.25), &model, 3).unwrap();
    let total: f64 = r.raw().iter().sum();
    let accidentals: f64 = r.background.as_array().iter().sum();
    let car = (total - accidentals) / accidentals;
    assert!((car - model.car()).abs() < 0.01, "{car}");
    assert!((model.car() - 2.0).abs() < 1e-12);
}

#[test]
fn identical_seeds_give_identical_records() {
    let tables = optimum_tables(0.02);
    let model = MeasurementModel::experimental();
    assert_eq!(records(&tables, &model, 99), records(&tables, &model, 99));
    let layout = HistogramLayout::default();
    let a = synthesize_histogram(&tables[0], &model, &layout, 4).unwrap();
    let b = synthesize_histogram(&tables[0], &model, &layout, 4).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn exact_table_i_counts_give_reference_s() {
    let recs = optimum_tables(0.0).map(|p| {
        let n = p.as_array().map(|x| (x * 1e9).round() as u64);
        record(n)
    });
    let est = chsh_estimate(&recs, false).unwrap();
    assert!((est.s - 2.566).abs() < 1e-3);
    for (c, want) in est.c_table.iter().zip([0.796, 0.796, 0.796, -0.178]) {
        assert!((c - want).abs() < 5e-4);
    }
}

#[test]
fn algebraic_extreme() {
    let same = record([10, 0, 0, 7]);
    let cross = record([0, 4, 9, 0]);
    let est = chsh_estimate(&[same.clone(), same.clone(), same, cross], false).unwrap();
    assert_eq!(est.s, 4.0);
}

#[test]
fn background_only_records_are_rejected() {
    let mut r = record([3, 2, 4, 1]);
    r.background = Outcomes::from_array([3.0, 2.0, 4.0, 1.0]);
    let err = chsh_estimate(&[r.clone(), r.clone(), r.clone(), r], true).unwrap_err();
    assert!(matches!(err, Error::NonPositiveDenominator { .. }));
    assert!(err.to_string().contains("non-positive net denominator"), "{err}");
}

#[test]
fn histogram_pipeline_recovers_s() {
    let chi = 0.02;
    let model = MeasurementModel::experimental().with_crosstalk(chi);
    let tables = optimum_tables(chi);
    let layout = HistogramLayout::default();
    let quad = SettingQuad::<f64>::reference_optimum();
    let target = chsh_ideal(&quad).unwrap().s_value * (1.0 - 2.0 * chi).powi(2);
    let mut k = 0;
    let recs = tables.map(|p| {
        k += 1;
        let h = synthesize_histogram(&p, &model, &layout, derive_seed(12, k)).unwrap();
        let h = Histogram::from_bytes(h.to_csv().as_bytes()).unwrap();
        extract_counts(&h, layout.peak_window(), layout.background_window(), model.duration).unwrap()
    });
    let est = chsh_estimate(&recs, true).unwrap();
    assert!((est.s - target).abs() <= 3.0 * est.sigma_s, "{} ± {} vs {target}", est.s, est.sigma_s);
}

#[test]
fn extracted_peak_matches_generating_means() {
    let model = MeasurementModel::experimental();
    let probs = ProbTable::new(0.45, 0.05, 0.05, 0.45);
    let layout = HistogramLayout::default();
    let h = synthesize_histogram(&probs, &model, &layout, 8).unwrap();
    let r = extract_counts(&h, layout.peak_window(), layout.background_window(), model.duration).unwrap();
    for o in Outcome::ALL {
        let i = o.index();
        let signal = model.duration * model.efficiency * model.pair_rate * probs.as_array()[i];
        let raw = r.raw()[i];
        assert!((r.net()[i] - signal).abs() <= 3.0 * raw.sqrt().max(1.0), "{o}");
    }
}

#[test]
fn calibrated_scan_visibility() {
    let (a, b) = (0.6955, 0.6955);
    let chi = calibrate_crosstalk(0.85, a, b).unwrap();
    assert!((model_scan_visibility(a, b, chi).unwrap() - 0.85).abs() < 1e-9);
    let alphas: Vec<f64> = (0..36).map(|k| std::f64::consts::TAU * k as f64 / 36.0).collect();
    let model = MeasurementModel::experimental().with_crosstalk(chi);
    // At experimental statistics a single scan is only good to its propagated sigma.
    let scan = simulate_scan(a, b, 0.0, &alphas, &model, 21).unwrap();
    let v = visibility(&scan, CrossOutcome::EO).unwrap();
    assert!((v.v - 0.85).abs() <= 3.0 * v.sigma_v, "{v:?}");
    let long = model.with_duration(model.duration * 100.0);
    let scan = simulate_scan(a, b, 0.0, &alphas, &long, 21).unwrap();
    let v = visibility(&scan, CrossOutcome::EO).unwrap();
    assert!((v.v - 0.85).abs() <= 0.01, "{v:?}");
}

#[test]
fn ideal_closed_form_scan_is_fully_visible() {
    let model = MeasurementModel::ideal();
    let alphas: Vec<f64> = (0..36).map(|k| std::f64::consts::TAU * k as f64 / 36.0).collect();
    let scan = simulate_scan(0.6955, 0.6955, 0.0, &alphas, &model, 2).unwrap();
    let v = visibility(&scan, CrossOutcome::OE).unwrap();
    assert!(v.v >= 0.999, "{v:?}");
}

#[test]
fn monte_carlo_ensemble_brackets_reference_value() {
    let chi = calibrate_crosstalk(0.85, 0.6955, 0.6955).unwrap();
    let model = MeasurementModel::experimental().with_crosstalk(chi);
    let summary = monte_carlo_chsh(&optimum_tables(chi), &model, 500, 2024, true).unwrap();
    assert!((2.25..=2.42).contains(&summary.mean_s), "{summary:?}");
    let ratio = summary.std_s / summary.mean_sigma_s;
    assert!((ratio - 1.0).abs() <= 0.25, "{summary:?}");
    let again = monte_carlo_chsh(&optimum_tables(chi), &model, 500, 2024, true).unwrap();
    assert_eq!(summary, again);
}

proptest! {
    #[test]
    fn correlators_bounded_for_nonnegative_counts(counts in proptest::array::uniform4(0u64..10_000)) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let r = record(counts);
        let est = chsh_estimate(&[r.clone(), r.clone(), r.clone(), r], false).unwrap();
        prop_assert!(est.c_table.iter().all(|c| c.abs() <= 1.0));
    }

    #[test]
    fn histogram_round_trip(
        width in 1e-12f64..1e-6,
        channels in proptest::collection::vec(
            (-50i64..50, proptest::collection::vec(0u64..1_000_000, 1..40)), 1..=4),
    ) {
        let mut h = Histogram::new(width).unwrap();
        for (outcome, (first, counts)) in Outcome::ALL.iter().zip(channels) {
            h.insert_channel(*outcome, first, counts).unwrap();
        }
        let text = h.to_csv();
        let back = Histogram::from_bytes(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &h);
        prop_assert_eq!(back.to_csv(), text);
    }
}
