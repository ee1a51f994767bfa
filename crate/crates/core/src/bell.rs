//! CHSH correlators over modulation settings, in the closed-form and the
//! finite-bin models, and the searches for the optimal settings.
//!
//! With correlators `E_ij = J₀(2D_ij)` the CHSH value is
//! `S = E₀₀ + E₀₁ + E₁₀ − E₁₁`. Choosing `a₀ = b₀ = c`, `a₁ = b₁ = 3c` with
//! phases `0, 0, π, π` gives `D₀₀ = D₀₁ = D₁₀ = D₁₁/3 = 2c` and reduces the
//! search to `S(c) = 3J₀(4c) − J₀(12c)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binspace::{finite_probabilities, DispersionProfile, ModulationSetting, ModulatorConfig};
use crate::closedform::{effective_drive, ideal_probabilities, EffectiveDrive};
use crate::counts::MeasurementModel;
use crate::error::{Error, Result};
use crate::optim::{golden_section_max, nelder_mead, NelderMeadOptions};
use crate::scalar::{wrap_phase, Real};
use crate::specialfn::{bessel_j, BESSEL_DOMAIN};

/// Optimal symmetric amplitude `c*` to the four decimals commonly quoted.
pub const OPTIMAL_SMALL_AMPLITUDE: f64 = 0.2318;
/// `3c*` to four decimals.
pub const OPTIMAL_LARGE_AMPLITUDE: f64 = 0.6955;

/// Alice's settings `A₀, A₁` and Bob's `B₀, B₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SettingQuad<T = f64> {
    pub a0: ModulationSetting<T>,
    pub a1: ModulationSetting<T>,
    pub b0: ModulationSetting<T>,
    pub b1: ModulationSetting<T>,
}

impl<T: Real> SettingQuad<T> {
    /// `a₀ = b₀ = c`, `a₁ = b₁ = 3c`, phases `γ, γ, γ+π, γ+π`.
    pub fn symmetric(c: T, gamma: T) -> Result<Self> {
        let three_c = T::lit(3.0) * c;
        let flip = gamma + T::PI();
        Ok(Self {
            a0: ModulationSetting::new(c, gamma)?,
            a1: ModulationSetting::new(three_c, flip)?,
            b0: ModulationSetting::new(c, gamma)?,
            b1: ModulationSetting::new(three_c, flip)?,
        })
    }

    /// `a₀ = b₀ = 0.2318`, `a₁ = b₁ = 0.6955`, `α₀ = β₀ = 0`, `α₁ = β₁ = π`.
    pub fn reference_optimum() -> Self {
        let small = T::lit(OPTIMAL_SMALL_AMPLITUDE);
        let large = T::lit(OPTIMAL_LARGE_AMPLITUDE);
        let pi = T::PI();
        Self {
            a0: ModulationSetting::new(small, T::zero()).expect("valid"),
            a1: ModulationSetting::new(large, pi).expect("valid"),
            b0: ModulationSetting::new(small, T::zero()).expect("valid"),
            b1: ModulationSetting::new(large, pi).expect("valid"),
        }
    }

    pub fn off() -> Self {
        let off = ModulationSetting::off();
        Self {
            a0: off,
            a1: off,
            b0: off,
            b1: off,
        }
    }

    /// Setting pairs in CHSH order `(A₀B₀, A₀B₁, A₁B₀, A₁B₁)`.
    pub fn pairs(&self) -> [(ModulationSetting<T>, ModulationSetting<T>); 4] {
        [
            (self.a0, self.b0),
            (self.a0, self.b1),
            (self.a1, self.b0),
            (self.a1, self.b1),
        ]
    }

    /// Adds `shift` to all four phases.
    pub fn phase_shifted(&self, shift: T) -> Self {
        Self {
            a0: self.a0.with_phase_shift(shift),
            a1: self.a1.with_phase_shift(shift),
            b0: self.b0.with_phase_shift(shift),
            b1: self.b1.with_phase_shift(shift),
        }
    }

    /// Gauge-fixed copy with `α₀ = 0`.
    pub fn gauge_normalized(&self) -> Self {
        self.phase_shifted(-self.a0.phase())
    }

    /// Exchanges the roles of Alice and Bob.
    pub fn swapped(&self) -> Self {
        Self {
            a0: self.b0,
            a1: self.b1,
            b0: self.a0,
            b1: self.a1,
        }
    }

    /// `[a₀, a₁, b₀, b₁, α₀, α₁, β₀, β₁]`.
    pub fn to_params(&self) -> [T; 8] {
        [
            self.a0.amplitude(),
            self.a1.amplitude(),
            self.b0.amplitude(),
            self.b1.amplitude(),
            self.a0.phase(),
            self.a1.phase(),
            self.b0.phase(),
            self.b1.phase(),
        ]
    }

    /// Inverse of [`Self::to_params`]; negative amplitudes flip the phase by
    /// π and magnitudes are clamped to `bound`.
    pub fn from_params(p: &[T], bound: T) -> Result<Self> {
        if p.len() != 8 {
            return Err(Error::invalid("a setting quad has 8 parameters"));
        }
        let s = |amp: T, phase: T| {
            let clamped = amp.max(-bound).min(bound);
            ModulationSetting::from_signed(clamped, phase)
        };
        Ok(Self {
            a0: s(p[0], p[4])?,
            a1: s(p[1], p[5])?,
            b0: s(p[2], p[6])?,
            b1: s(p[3], p[7])?,
        })
    }
}

/// Correlators, CHSH value and effective drives for a setting quad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshReport<T = f64> {
    /// `E₀₀, E₀₁, E₁₀, E₁₁`.
    pub correlators: [T; 4],
    pub s_value: T,
    pub drives: [EffectiveDrive<T>; 4],
}

/// `E₀₀ + E₀₁ + E₁₀ − E₁₁`.
pub fn chsh_combination<T: Real>(e: &[T; 4]) -> T {
    e[0] + e[1] + e[2] - e[3]
}

fn drives_of<T: Real>(quad: &SettingQuad<T>) -> [EffectiveDrive<T>; 4] {
    quad.pairs().map(|(a, b)| effective_drive(&a, &b))
}

/// Closed-form CHSH report: `E_ij = J₀(2D_ij)`.
pub fn chsh_ideal<T: Real>(quad: &SettingQuad<T>) -> Result<ChshReport<T>> {
    let drives = drives_of(quad);
    let mut correlators = [T::zero(); 4];
    for (e, drive) in correlators.iter_mut().zip(drives.iter()) {
        *e = ideal_probabilities(drive)?.correlator();
    }
    Ok(ChshReport {
        correlators,
        s_value: chsh_combination(&correlators),
        drives,
    })
}

/// `S(c) = 3J₀(4c) − J₀(12c)`.
pub fn symmetric_chsh<T: Real>(c: T) -> Result<T> {
    Ok(T::lit(3.0) * bessel_j(0, T::lit(4.0) * c)? - bessel_j(0, T::lit(12.0) * c)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricOptimum<T = f64> {
    pub c_star: T,
    pub s_star: T,
}

const SYMMETRIC_GRID: usize = 400;

/// Maximizes `S(c)` over `[lo, hi] ⊆ [0, 1]`: a grid scan brackets the
/// global maximum, golden-section search refines it to `tolerance`.
pub fn optimize_symmetric<T: Real>(lo: T, hi: T, tolerance: T) -> Result<SymmetricOptimum<T>> {
    if !(lo >= T::zero() && hi <= T::one() && lo < hi) {
        return Err(Error::invalid(format!("search interval [{lo}, {hi}] must lie in [0, 1]")));
    }
    if !(tolerance >= T::lit(1e-6)) {
        return Err(Error::invalid(format!("tolerance must be >= 1e-6, got {tolerance}")));
    }
    let no_interior = || Error::NoInteriorMaximum {
        lo: lo.to_f64_lossy(),
        hi: hi.to_f64_lossy(),
    };
    let step = (hi - lo) / T::from_int(SYMMETRIC_GRID as i64);
    let grid: Vec<T> = (0..=SYMMETRIC_GRID)
        .map(|k| lo + step * T::from_int(k as i64))
        .collect();
    let values = grid
        .iter()
        .map(|&c| symmetric_chsh(c))
        .collect::<Result<Vec<T>>>()?;
    let best = (0..values.len())
        .max_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty grid");
    if best == 0 || best == SYMMETRIC_GRID {
        return Err(no_interior());
    }
    let (c_star, s_star) = golden_section_max(
        |c| symmetric_chsh(c).unwrap_or(T::neg_infinity()),
        grid[best - 1],
        grid[best + 1],
        tolerance,
    );
    let edge_value = values[0].max(values[SYMMETRIC_GRID]);
    if !(s_star > edge_value) {
        return Err(no_interior());
    }
    Ok(SymmetricOptimum { c_star, s_star })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct GeneralOptimum<T = f64> {
    /// Best quad, gauge-fixed to `α₀ = 0`.
    pub quad: SettingQuad<T>,
    pub report: ChshReport<T>,
    /// Index of the start that produced it (0 is the caller's initial quad).
    pub start: usize,
}

const POLISH_ROUNDS: usize = 4;

fn local_search<T: Real>(start: [T; 8], bound: T) -> (Vec<T>, T) {
    let objective = |x: &[T]| -> T {
        match SettingQuad::from_params(x, bound).and_then(|q| chsh_ideal(&q)) {
            Ok(report) => -report.s_value,
            Err(_) => T::infinity(),
        }
    };
    let amp_step = T::lit(0.1) * bound.min(T::one());
    let steps = [
        amp_step,
        amp_step,
        amp_step,
        amp_step,
        T::lit(0.5),
        T::lit(0.5),
        T::lit(0.5),
        T::lit(0.5),
    ];
    let options = NelderMeadOptions::default();
    let mut x = start.to_vec();
    let mut value = objective(&x);
    // Restarting the simplex around the incumbent avoids premature collapse.
    for round in 0..POLISH_ROUNDS {
        let scale = T::lit(0.5f64.powi(round as i32));
        let scaled: Vec<T> = steps.iter().map(|s| *s * scale).collect();
        let m = nelder_mead(objective, &x, &scaled, &options);
        let improved = value - m.value;
        if m.value <= value {
            x = m.x;
            value = m.value;
        }
        if improved.abs() < T::lit(1e-13) && round > 0 {
            break;
        }
    }
    (x, -value)
}

/// Multi-start Nelder–Mead maximization of the closed-form CHSH value over
/// all eight amplitudes and phases. Start 0 is `initial`; starts
/// `1..restarts` are drawn uniformly (amplitudes in `[0, bound]`, phases in
/// `[0, 2π)`) from a ChaCha stream seeded with `seed`.
pub fn optimize_general<T: Real>(
    initial: &SettingQuad<T>,
    amplitude_bound: T,
    restarts: usize,
    seed: u64,
) -> Result<GeneralOptimum<T>> {
    if !(amplitude_bound >= T::one()) {
        return Err(Error::invalid(format!("amplitude bound must be >= 1, got {amplitude_bound}")));
    }
    if amplitude_bound * T::lit(4.0) > T::lit(BESSEL_DOMAIN) {
        return Err(Error::invalid("amplitude bound exceeds the Bessel domain (max 12.5)"));
    }
    if restarts < 1 {
        return Err(Error::invalid("at least one start is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound_f = amplitude_bound.to_f64_lossy();
    let mut starts = vec![initial.to_params()];
    for _ in 1..restarts {
        let mut p = [T::zero(); 8];
        for (i, v) in p.iter_mut().enumerate() {
            let draw: f64 = if i < 4 {
                rng.gen_range(0.0..bound_f)
            } else {
                rng.gen_range(0.0..std::f64::consts::TAU)
            };
            *v = T::lit(draw);
        }
        starts.push(p);
    }

    let results: Vec<(Vec<T>, T)> = starts
        .into_par_iter()
        .map(|p| local_search(p, amplitude_bound))
        .collect();

    let mut best = 0;
    for (i, (_, s)) in results.iter().enumerate() {
        if *s > results[best].1 {
            best = i;
        }
    }
    let quad = SettingQuad::from_params(&results[best].0, amplitude_bound)?.gauge_normalized();
    let report = chsh_ideal(&quad)?;
    Ok(GeneralOptimum {
        quad,
        report,
        start: best,
    })
}

/// CHSH report from the finite-bin simulation: correlated state over `bins`,
/// dispersion, modulation and parity measurement with crosstalk, for each
/// of the four setting pairs. Correlators are normalized to the detected
/// probability so truncation leakage does not bias them.
pub fn chsh_finite<T: Real>(
    quad: &SettingQuad<T>,
    bins: &[i64],
    model: &MeasurementModel<T>,
    dispersion: &DispersionProfile<T>,
    config: &ModulatorConfig<T>,
) -> Result<ChshReport<T>> {
    let tables = quad
        .pairs()
        .par_iter()
        .map(|(a, b)| finite_probabilities(bins, a, b, model, dispersion, config))
        .collect::<Result<Vec<_>>>()?;
    let mut correlators = [T::zero(); 4];
    for (e, t) in correlators.iter_mut().zip(tables.iter()) {
        *e = t.normalized_correlator();
    }
    Ok(ChshReport {
        correlators,
        s_value: chsh_combination(&correlators),
        drives: drives_of(quad),
    })
}

/// Shortest angular distance between two phases.
pub fn phase_distance<T: Real>(x: T, y: T) -> T {
    let d = wrap_phase(x - y);
    d.min(T::two_pi() - d)
}
