use freqbell::specialfn::{
    bessel_j, bessel_j_table, jacobi_anger_residual, truncation_order, TruncationPolicy,
};
use proptest::prelude::*;

/// Plain power series, summed until the terms stop mattering.
fn series_oracle(p: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(p as i32) / (1..=p).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= -half * half / (k as f64 * (k + p) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

#[test]
fn matches_series_oracle_on_small_arguments() {
    for p in 0..12u32 {
        for k in 0..=60 {
            let x = -6.0 + 0.2 * k as f64;
            let got = bessel_j(p as i64, x).unwrap();
            let want = series_oracle(p, x);
            assert!((got - want).abs() < 1e-12, "J_{p}({x}): {got} vs {want}");
        }
    }
}

#[test]
fn first_zero_of_j0() {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if series_oracle(0, lo) * series_oracle(0, mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    assert!((root - 2.404_825_557_695_773).abs() < 1e-12);
    assert!(bessel_j(0, root).unwrap().abs() < 1e-12);
    assert!(bessel_j(0, 2.405_f64).unwrap().abs() < 1e-4);
}

#[test]
fn table_i_correlator_value() {
    let j = bessel_j(0, 0.9272_f64).unwrap();
    assert!((j - 0.796).abs() < 5e-4);
}

#[test]
fn reflection_on_grid() {
    for p in 0..=16i64 {
        for k in 0..=80 {
            let x = -20.0 + 0.5 * k as f64;
            let pos = bessel_j(p, x).unwrap();
            let neg = bessel_j(-p, x).unwrap();
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            assert!((neg - sign * pos).abs() <= 1e-12);
        }
    }
}

#[test]
fn recurrence_on_grid() {
    for k in 1..=100 {
        let x = 0.3 * k as f64;
        for p in -10i64..=30 {
            let lhs = bessel_j(p - 1, x).unwrap() + bessel_j(p + 1, x).unwrap();
            let rhs = 2.0 * p as f64 / x * bessel_j(p, x).unwrap();
            assert!((lhs - rhs).abs() < 1e-10, "p={p} x={x}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn normalization_over_truncated_orders() {
    let policy = TruncationPolicy::default();
    for k in 0..=300 {
        let c = 0.01 * k as f64;
        let order = truncation_order(c, &policy).unwrap();
        let t = bessel_j_table(order, c).unwrap();
        let sum: f64 = t[0] * t[0] + 2.0 * t[1..].iter().map(|j| j * j).sum::<f64>();
        assert!(sum >= 1.0 - policy.epsilon * policy.epsilon - 1e-15, "c={c}: {sum}");
        assert!(sum <= 1.0 + 1e-15, "c={c}: {sum}");
    }
}

#[test]
fn truncation_tail_below_tolerance() {
    let policy = TruncationPolicy::default();
    let order = truncation_order(0.6955_f64, &policy).unwrap();
    let tail: f64 = (order + 1..order + 40)
        .map(|p| 2.0 * series_oracle(p as u32, 0.6955).powi(2))
        .sum();
    assert!(tail <= 1e-24);
    assert!(truncation_order(0.2318_f64, &policy).unwrap() <= order);
}

#[test]
fn jacobi_anger_at_default_truncation() {
    let policy = TruncationPolicy::default();
    for k in 0..=30 {
        let c = 0.1 * k as f64;
        let order = truncation_order(c, &policy).unwrap();
        for t in 0..16 {
            let theta = t as f64 * std::f64::consts::TAU / 16.0;
            assert!(jacobi_anger_residual(c, theta, order).unwrap() <= 1e-10);
        }
    }
    assert!(jacobi_anger_residual(2.0_f64, std::f64::consts::FRAC_PI_2, 40).unwrap() <= 1e-10);
}

#[test]
fn outside_domain_is_an_error() {
    assert!(bessel_j(0, 50.5_f64).is_err());
    assert!(bessel_j(3, -51.0_f64).is_err());
    assert!(bessel_j(3, 50.0_f64).is_ok());
}

proptest! {
    #[test]
    fn reflection_holds_for_random_arguments(p in 0i64..40, x in -50.0f64..50.0) {
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((bessel_j(-p, x).unwrap() - sign * bessel_j(p, x).unwrap()).abs() <= 1e-12);
        prop_assert!((bessel_j(p, -x).unwrap() - sign * bessel_j(p, x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn bounded_by_one(p in -60i64..60, x in -50.0f64..50.0) {
        prop_assert!(bessel_j(p, x).unwrap().abs() <= 1.0 + 1e-12);
    }
}
