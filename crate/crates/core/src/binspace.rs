//! Finite-window simulation of the discrete frequency-bin space.
//!
//! A two-photon state is a dense complex table over a rectangular window of
//! bin pairs `(m, n)`, where bin `m` on arm A means frequency `ω₀ + mΩ`.
//! A phase modulator on one arm convolves that arm's index with the
//! sideband kernel `J_p(c) e^{ip(γ − π/2)}`; the interleavers project onto
//! bin parity.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::closedform::ProbTable;
use crate::counts::MeasurementModel;
use crate::error::{Error, Result};
use crate::scalar::{wrap_phase, Real};
use crate::specialfn::{sideband_kernel, truncation_order, TruncationPolicy};

/// Default absolute bin bound `|n| <= 10_000` for modulated windows.
pub const DEFAULT_BIN_BOUND: i64 = 10_000;

/// Inclusive range of bin indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinWindow {
    min_bin: i64,
    max_bin: i64,
}

impl BinWindow {
    pub fn new(min_bin: i64, max_bin: i64) -> Result<Self> {
        if min_bin > max_bin {
            return Err(Error::invalid(format!(
                "empty bin window [{min_bin}, {max_bin}]"
            )));
        }
        Ok(Self { min_bin, max_bin })
    }

    /// Window `[-half, half]`.
    pub fn symmetric(half: i64) -> Self {
        let half = half.abs();
        Self {
            min_bin: -half,
            max_bin: half,
        }
    }

    pub fn min_bin(&self) -> i64 {
        self.min_bin
    }

    pub fn max_bin(&self) -> i64 {
        self.max_bin
    }

    pub fn width(&self) -> usize {
        (self.max_bin - self.min_bin + 1) as usize
    }

    pub fn contains(&self, bin: i64) -> bool {
        (self.min_bin..=self.max_bin).contains(&bin)
    }

    /// Position of `bin` inside the window.
    pub fn offset(&self, bin: i64) -> Option<usize> {
        self.contains(bin).then(|| (bin - self.min_bin) as usize)
    }

    pub fn bins(&self) -> impl Iterator<Item = i64> {
        self.min_bin..=self.max_bin
    }

    pub fn widened(&self, by: usize) -> Self {
        Self {
            min_bin: self.min_bin - by as i64,
            max_bin: self.max_bin + by as i64,
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            min_bin: -self.max_bin,
            max_bin: -self.min_bin,
        }
    }

    pub fn shifted(&self, by: i64) -> Self {
        Self {
            min_bin: self.min_bin + by,
            max_bin: self.max_bin + by,
        }
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let min_bin = self.min_bin.max(other.min_bin);
        let max_bin = self.max_bin.min(other.max_bin);
        (min_bin <= max_bin).then_some(Self { min_bin, max_bin })
    }
}

/// Which photon a device acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    A,
    B,
}

/// RF drive of one phase modulator: normalized amplitude `c = πv/V_π` and
/// phase `γ`, canonicalized to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "SettingRepr<T>",
    bound(deserialize = "T: Real + Deserialize<'de>")
)]
pub struct ModulationSetting<T = f64> {
    amplitude: T,
    phase: T,
}

#[derive(Deserialize)]
struct SettingRepr<T> {
    amplitude: T,
    phase: T,
}

impl<T: Real> TryFrom<SettingRepr<T>> for ModulationSetting<T> {
    type Error = Error;

    fn try_from(raw: SettingRepr<T>) -> Result<Self> {
        Self::new(raw.amplitude, raw.phase)
    }
}

impl<T: Real> ModulationSetting<T> {
    pub fn new(amplitude: T, phase: T) -> Result<Self> {
        if !(amplitude >= T::zero()) || !amplitude.is_finite() {
            return Err(Error::invalid(format!(
                "modulation amplitude must be finite and >= 0, got {amplitude}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::invalid(format!("modulation phase must be finite, got {phase}")));
        }
        Ok(Self {
            amplitude,
            phase: wrap_phase(phase),
        })
    }

    /// Accepts a signed amplitude: `(-c, γ)` drives the same as `(c, γ + π)`.
    pub fn from_signed(amplitude: T, phase: T) -> Result<Self> {
        if amplitude < T::zero() {
            Self::new(-amplitude, phase + T::PI())
        } else {
            Self::new(amplitude, phase)
        }
    }

    pub fn off() -> Self {
        Self {
            amplitude: T::zero(),
            phase: T::zero(),
        }
    }

    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    pub fn phase(&self) -> T {
        self.phase
    }

    pub fn with_phase_shift(&self, shift: T) -> Self {
        Self {
            amplitude: self.amplitude,
            phase: wrap_phase(self.phase + shift),
        }
    }
}

/// Per-bin spectral phase `φ(n) = quadratic_coefficient · n²`, with optional
/// explicit overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DispersionProfile<T = f64> {
    pub quadratic_coefficient: T,
    pub per_bin_overrides: BTreeMap<i64, T>,
}

impl<T: Real> DispersionProfile<T> {
    pub fn none() -> Self {
        Self {
            quadratic_coefficient: T::zero(),
            per_bin_overrides: BTreeMap::new(),
        }
    }

    pub fn quadratic(coefficient: T) -> Self {
        Self {
            quadratic_coefficient: coefficient,
            per_bin_overrides: BTreeMap::new(),
        }
    }

    pub fn with_override(mut self, bin: i64, phase: T) -> Self {
        self.per_bin_overrides.insert(bin, phase);
        self
    }

    pub fn is_trivial(&self) -> bool {
        self.quadratic_coefficient == T::zero() && self.per_bin_overrides.is_empty()
    }

    pub fn phase_at(&self, bin: i64) -> T {
        match self.per_bin_overrides.get(&bin) {
            Some(phase) => *phase,
            None => {
                let n = T::from_int(bin);
                self.quadratic_coefficient * n * n
            }
        }
    }
}

/// Limits applied by [`apply_modulator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatorConfig<T = f64> {
    pub truncation: TruncationPolicy<T>,
    /// Amplitude pushed outside this window on arm A is counted as leaked.
    pub clip_a: Option<BinWindow>,
    /// Same for arm B.
    pub clip_b: Option<BinWindow>,
    /// Any window reaching beyond `|n| > bin_bound` is an error.
    pub bin_bound: i64,
}

impl<T: Real> Default for ModulatorConfig<T> {
    fn default() -> Self {
        Self {
            truncation: TruncationPolicy::default(),
            clip_a: None,
            clip_b: None,
            bin_bound: DEFAULT_BIN_BOUND,
        }
    }
}

impl<T: Real> ModulatorConfig<T> {
    pub fn with_truncation(truncation: TruncationPolicy<T>) -> Self {
        Self {
            truncation,
            ..Self::default()
        }
    }

    fn clip(&self, arm: Arm) -> Option<BinWindow> {
        match arm {
            Arm::A => self.clip_a,
            Arm::B => self.clip_b,
        }
    }
}

/// Two-photon amplitude table over `window_a × window_b`, plus the
/// probability weight that has been truncated away.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState<T = f64> {
    window_a: BinWindow,
    window_b: BinWindow,
    /// Row-major: row = arm-A bin, column = arm-B bin.
    amplitudes: Vec<Complex<T>>,
    leaked_norm: T,
}

fn norm_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e4))
}

impl<T: Real> TwoPhotonState<T> {
    /// Builds a state from a row-major table; checks shape and that
    /// `Σ|amp|² + leaked_norm = 1`.
    pub fn from_amplitudes(
        window_a: BinWindow,
        window_b: BinWindow,
        amplitudes: Vec<Complex<T>>,
        leaked_norm: T,
    ) -> Result<Self> {
        if amplitudes.len() != window_a.width() * window_b.width() {
            return Err(Error::invalid(format!(
                "amplitude table has {} entries, windows need {}",
                amplitudes.len(),
                window_a.width() * window_b.width()
            )));
        }
        if !(leaked_norm >= T::zero()) {
            return Err(Error::invalid("leaked_norm must be >= 0"));
        }
        let state = Self {
            window_a,
            window_b,
            amplitudes,
            leaked_norm,
        };
        let total = state.total_weight();
        if (total - T::one()).abs() > norm_tolerance() {
            return Err(Error::invalid(format!(
                "state is not normalized: norm + leaked = {total}"
            )));
        }
        Ok(state)
    }

    /// `|ψ_A⟩ ⊗ |ψ_B⟩`; each factor must be normalized.
    pub fn product(
        window_a: BinWindow,
        psi_a: &[Complex<T>],
        window_b: BinWindow,
        psi_b: &[Complex<T>],
    ) -> Result<Self> {
        if psi_a.len() != window_a.width() || psi_b.len() != window_b.width() {
            return Err(Error::invalid("factor length does not match its window"));
        }
        let mut amplitudes = Vec::with_capacity(psi_a.len() * psi_b.len());
        for x in psi_a {
            for y in psi_b {
                amplitudes.push(*x * *y);
            }
        }
        Self::from_amplitudes(window_a, window_b, amplitudes, T::zero())
    }

    pub fn window_a(&self) -> BinWindow {
        self.window_a
    }

    pub fn window_b(&self) -> BinWindow {
        self.window_b
    }

    pub fn window(&self, arm: Arm) -> BinWindow {
        match arm {
            Arm::A => self.window_a,
            Arm::B => self.window_b,
        }
    }

    pub fn leaked_norm(&self) -> T {
        self.leaked_norm
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// Amplitude on bin pair `(m, n)`; zero outside the windows.
    pub fn amplitude(&self, m: i64, n: i64) -> Complex<T> {
        match (self.window_a.offset(m), self.window_b.offset(n)) {
            (Some(i), Some(j)) => self.amplitudes[i * self.window_b.width() + j],
            _ => Complex::new(T::zero(), T::zero()),
        }
    }

    /// `Σ |amp|²`.
    pub fn norm_sqr(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// `Σ |amp|² + leaked_norm`; 1 up to truncation error.
    pub fn total_weight(&self) -> T {
        self.norm_sqr() + self.leaked_norm
    }

    /// Relabels every bin on `arm` as `n + k`.
    pub fn translated(&self, arm: Arm, k: i64) -> Self {
        let mut out = self.clone();
        match arm {
            Arm::A => out.window_a = self.window_a.shifted(k),
            Arm::B => out.window_b = self.window_b.shifted(k),
        }
        out
    }

    /// Largest entrywise modulus difference, comparing on the union of windows.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let lo_a = self.window_a.min_bin.min(other.window_a.min_bin);
        let hi_a = self.window_a.max_bin.max(other.window_a.max_bin);
        let lo_b = self.window_b.min_bin.min(other.window_b.min_bin);
        let hi_b = self.window_b.max_bin.max(other.window_b.max_bin);
        let mut worst = T::zero();
        for m in lo_a..=hi_a {
            for n in lo_b..=hi_b {
                worst = worst.max((self.amplitude(m, n) - other.amplitude(m, n)).norm());
            }
        }
        worst
    }
}

/// Uniform correlated state `K^{-1/2} Σ_{n ∈ bins} |n⟩_A |−n⟩_B`.
pub fn correlated_state<T: Real>(bins_a: &[i64]) -> Result<TwoPhotonState<T>> {
    let (&lo, &hi) = match (bins_a.iter().min(), bins_a.iter().max()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(Error::invalid("correlated state needs at least one bin")),
    };
    let window_a = BinWindow::new(lo, hi)?;
    let window_b = window_a.negated();
    let mut seen = vec![false; window_a.width()];
    let weight = Complex::new(T::one() / T::from_int(bins_a.len() as i64).sqrt(), T::zero());
    let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); window_a.width() * window_b.width()];
    for &n in bins_a {
        let i = (n - lo) as usize;
        if seen[i] {
            return Err(Error::DuplicateBin(n));
        }
        seen[i] = true;
        let j = window_b.offset(-n).expect("negated window contains -n");
        amplitudes[i * window_b.width() + j] = weight;
    }
    Ok(TwoPhotonState {
        window_a,
        window_b,
        amplitudes,
        leaked_norm: T::zero(),
    })
}

/// Single-photon modulation: convolves `amplitudes` (over `window`) with the
/// truncated sideband kernel. Returns the widened vector and its window.
pub fn modulate_amplitudes<T: Real>(
    amplitudes: &[Complex<T>],
    window: BinWindow,
    setting: &ModulationSetting<T>,
    policy: &TruncationPolicy<T>,
) -> Result<(Vec<Complex<T>>, BinWindow)> {
    if amplitudes.len() != window.width() {
        return Err(Error::invalid("amplitude vector does not match its window"));
    }
    let order = truncation_order(setting.amplitude(), policy)?;
    let kernel = sideband_kernel(setting.amplitude(), setting.phase(), order)?;
    let out_window = window.widened(order);
    let mut out = vec![Complex::new(T::zero(), T::zero()); out_window.width()];
    for (i, z) in amplitudes.iter().enumerate() {
        for (q, k) in kernel.iter().enumerate() {
            out[i + q] += *k * *z;
        }
    }
    Ok((out, out_window))
}

/// Applies a phase modulator to one arm of the state.
///
/// The arm's window grows by the truncation order of `setting.amplitude()`.
/// Weight landing outside the configured clip window is moved into
/// `leaked_norm`; a window reaching beyond `config.bin_bound` is an error.
pub fn apply_modulator<T: Real>(
    state: &TwoPhotonState<T>,
    arm: Arm,
    setting: &ModulationSetting<T>,
    config: &ModulatorConfig<T>,
) -> Result<TwoPhotonState<T>> {
    let order = truncation_order(setting.amplitude(), &config.truncation)?;
    let widened = state.window(arm).widened(order);
    let target = match config.clip(arm) {
        Some(clip) => widened.intersect(&clip).ok_or_else(|| {
            Error::invalid("clip window does not overlap the modulated window")
        })?,
        None => widened,
    };
    if target.min_bin < -config.bin_bound || target.max_bin > config.bin_bound {
        return Err(Error::WindowBound {
            min: target.min_bin,
            max: target.max_bin,
            bound: config.bin_bound,
        });
    }
    if order == 0 && target == state.window(arm) {
        // J_0(0) = 1: identity, no kernel needed.
        return Ok(state.clone());
    }

    let kernel = sideband_kernel(setting.amplitude(), setting.phase(), order)?;
    let zero = Complex::new(T::zero(), T::zero());
    let (wa, wb) = (state.window_a.width(), state.window_b.width());

    let (window_a, window_b) = match arm {
        Arm::A => (widened, state.window_b),
        Arm::B => (state.window_a, widened),
    };
    let out_cols = window_b.width();
    let mut full = vec![zero; window_a.width() * out_cols];
    for i in 0..wa {
        for j in 0..wb {
            let z = state.amplitudes[i * wb + j];
            if z == zero {
                continue;
            }
            for (q, k) in kernel.iter().enumerate() {
                let (r, c) = match arm {
                    Arm::A => (i + q, j),
                    Arm::B => (i, j + q),
                };
                full[r * out_cols + c] += *k * z;
            }
        }
    }

    if target == widened {
        return Ok(TwoPhotonState {
            window_a,
            window_b,
            amplitudes: full,
            leaked_norm: state.leaked_norm,
        });
    }

    let (clip_a, clip_b) = match arm {
        Arm::A => (target, window_b),
        Arm::B => (window_a, target),
    };
    let mut kept = Vec::with_capacity(clip_a.width() * clip_b.width());
    let mut leaked = state.leaked_norm;
    for (r, m) in window_a.bins().enumerate() {
        for (c, n) in window_b.bins().enumerate() {
            let z = full[r * out_cols + c];
            if clip_a.contains(m) && clip_b.contains(n) {
                kept.push(z);
            } else {
                leaked += z.norm_sqr();
            }
        }
    }
    Ok(TwoPhotonState {
        window_a: clip_a,
        window_b: clip_b,
        amplitudes: kept,
        leaked_norm: leaked,
    })
}

/// Multiplies the amplitude of bin `n` on `arm` by `e^{iφ(n)}`.
pub fn apply_dispersion<T: Real>(
    state: &TwoPhotonState<T>,
    profile: &DispersionProfile<T>,
    arm: Arm,
) -> TwoPhotonState<T> {
    if profile.is_trivial() {
        return state.clone();
    }
    let phases: Vec<Complex<T>> = state
        .window(arm)
        .bins()
        .map(|n| Complex::from_polar(T::one(), profile.phase_at(n)))
        .collect();
    let wb = state.window_b.width();
    let mut out = state.clone();
    for (idx, z) in out.amplitudes.iter_mut().enumerate() {
        let (i, j) = (idx / wb, idx % wb);
        let phase = match arm {
            Arm::A => phases[i],
            Arm::B => phases[j],
        };
        *z *= phase;
    }
    out
}

/// Parity coincidence table after interleaver crosstalk. Sums to
/// `1 − leaked_norm`.
pub fn parity_probabilities<T: Real>(
    state: &TwoPhotonState<T>,
    model: &MeasurementModel<T>,
) -> ProbTable<T> {
    let mut table = [T::zero(); 4];
    let wb = state.window_b.width();
    for (i, m) in state.window_a.bins().enumerate() {
        let x = m.rem_euclid(2) as usize;
        for (j, n) in state.window_b.bins().enumerate() {
            let y = n.rem_euclid(2) as usize;
            table[2 * x + y] += state.amplitudes[i * wb + j].norm_sqr();
        }
    }
    ProbTable::from_array(table).with_crosstalk(model.crosstalk)
}

/// Truncated phase state: entry `e^{inφ}/√(2π)` at bin `n`.
pub fn phase_state<T: Real>(varphi: T, window: BinWindow) -> Result<Vec<Complex<T>>> {
    if window.width() < 3 {
        return Err(Error::invalid("phase state needs a window of width >= 3"));
    }
    let scale = T::one() / T::two_pi().sqrt();
    Ok(window
        .bins()
        .map(|n| Complex::from_polar(scale, T::from_int(n) * varphi))
        .collect())
}

/// Full pipeline for one setting pair: correlated state over `bins`,
/// dispersion on both arms, modulation of A then B, parity measurement.
pub fn finite_probabilities<T: Real>(
    bins: &[i64],
    a_setting: &ModulationSetting<T>,
    b_setting: &ModulationSetting<T>,
    model: &MeasurementModel<T>,
    dispersion: &DispersionProfile<T>,
    config: &ModulatorConfig<T>,
) -> Result<ProbTable<T>> {
    let state = correlated_state(bins)?;
    let state = apply_dispersion(&state, dispersion, Arm::A);
    let state = apply_dispersion(&state, dispersion, Arm::B);
    let state = apply_modulator(&state, Arm::A, a_setting, config)?;
    let state = apply_modulator(&state, Arm::B, b_setting, config)?;
    Ok(parity_probabilities(&state, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::bessel_j;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ideal() -> MeasurementModel<f64> {
        MeasurementModel::ideal()
    }

    fn setting(c: f64, g: f64) -> ModulationSetting<f64> {
        ModulationSetting::new(c, g).unwrap()
    }

    #[test]
    fn window_basics() {
        assert!(BinWindow::new(3, 2).is_err());
        let w = BinWindow::new(1, 6).unwrap();
        assert_eq!(w.width(), 6);
        assert_eq!(w.negated(), BinWindow::new(-6, -1).unwrap());
        assert_eq!(w.widened(2), BinWindow::new(-1, 8).unwrap());
        assert_eq!(w.offset(1), Some(0));
        assert_eq!(w.offset(7), None);
        assert_eq!(w.intersect(&BinWindow::new(7, 9).unwrap()), None);
    }

    #[test]
    fn setting_canonicalizes_phase() {
        let s = setting(0.5, -FRAC_PI_2);
        assert!((s.phase() - 3.0 * FRAC_PI_2).abs() < 1e-15);
        assert!(ModulationSetting::new(-0.1, 0.0).is_err());
        let flipped = ModulationSetting::from_signed(-0.3, 0.0).unwrap();
        assert_eq!(flipped.amplitude(), 0.3);
        assert!((flipped.phase() - PI).abs() < 1e-15);
    }

    #[test]
    fn setting_json_validates() {
        let s: ModulationSetting = serde_json::from_str(r#"{"amplitude":0.2,"phase":7.0}"#).unwrap();
        assert!((s.phase() - (7.0 - 2.0 * PI)).abs() < 1e-12);
        assert!(serde_json::from_str::<ModulationSetting>(r#"{"amplitude":-1,"phase":0}"#).is_err());
    }

    #[test]
    fn six_bin_state() {
        let bins: Vec<i64> = (1..=6).collect();
        let state = correlated_state::<f64>(&bins).unwrap();
        let w = 1.0 / 6.0_f64.sqrt();
        for m in 1..=6 {
            for n in -6..=-1 {
                let want = if n == -m { w } else { 0.0 };
                assert!((state.amplitude(m, n).re - want).abs() < 1e-15);
                assert_eq!(state.amplitude(m, n).im, 0.0);
            }
        }
        assert!((state.total_weight() - 1.0).abs() < 1e-15);
        assert_eq!(state.leaked_norm(), 0.0);
    }

    #[test]
    fn single_bin_and_duplicates() {
        let s = correlated_state::<f64>(&[0]).unwrap();
        assert_eq!(s.amplitude(0, 0), Complex::new(1.0, 0.0));
        assert_eq!(correlated_state::<f64>(&[1, 2, 1]), Err(Error::DuplicateBin(1)));
        assert!(correlated_state::<f64>(&[]).is_err());
    }

    #[test]
    fn wide_state_parity_before_modulation() {
        let bins: Vec<i64> = (-20..=20).collect();
        let s = correlated_state::<f64>(&bins).unwrap();
        let p = parity_probabilities(&s, &ideal());
        // 21 even and 20 odd bins.
        assert!((p.p_ee - 21.0 / 41.0).abs() < 1e-15);
        assert!((p.p_oo - 20.0 / 41.0).abs() < 1e-15);
        assert_eq!(p.p_eo, 0.0);
        assert_eq!(p.p_oe, 0.0);
    }

    #[test]
    fn unmodulated_six_bins_only_same_parity() {
        let bins: Vec<i64> = (1..=6).collect();
        let s = correlated_state::<f64>(&bins).unwrap();
        let p = parity_probabilities(&s, &ideal());
        for (got, want) in p.as_array().iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn full_crosstalk_depolarizes() {
        let bins: Vec<i64> = (1..=6).collect();
        let s = correlated_state::<f64>(&bins).unwrap();
        let s = apply_modulator(&s, Arm::A, &setting(0.4, 1.0), &ModulatorConfig::default()).unwrap();
        let mut model = ideal();
        model.crosstalk = 0.5;
        let p = parity_probabilities(&s, &model);
        for v in p.as_array() {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let bins: Vec<i64> = (1..=6).collect();
        let s = correlated_state::<f64>(&bins).unwrap();
        let out = apply_modulator(&s, Arm::A, &setting(0.0, 2.3), &ModulatorConfig::default()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn product_state_reads_off_kernel() {
        let s = correlated_state::<f64>(&[0]).unwrap();
        let (c, g) = (0.6955, 0.8);
        let out = apply_modulator(&s, Arm::A, &setting(c, g), &ModulatorConfig::default()).unwrap();
        for p in -5_i64..=5 {
            let want = Complex::from_polar(1.0, p as f64 * (g - FRAC_PI_2)) * bessel_j(p, c).unwrap();
            assert!((out.amplitude(p, 0) - want).norm() < 1e-14, "p = {p}");
        }
    }

    #[test]
    fn clipping_moves_weight_into_leak() {
        let s = correlated_state::<f64>(&[0]).unwrap();
        let config = ModulatorConfig {
            clip_a: Some(BinWindow::new(-1, 1).unwrap()),
            ..ModulatorConfig::default()
        };
        let out = apply_modulator(&s, Arm::A, &setting(0.6955, 0.0), &config).unwrap();
        assert_eq!(out.window_a(), BinWindow::new(-1, 1).unwrap());
        let c = 0.6955_f64;
        let inside: f64 = (-1..=1).map(|p| bessel_j(p, c).unwrap().powi(2)).sum();
        assert!((out.norm_sqr() - inside).abs() < 1e-14);
        assert!((out.total_weight() - 1.0).abs() < 1e-12);
        let p = parity_probabilities(&out, &ideal());
        assert!((p.total() - (1.0 - out.leaked_norm())).abs() < 1e-14);
    }

    #[test]
    fn bin_bound_is_enforced() {
        let s = correlated_state::<f64>(&[0]).unwrap();
        let config = ModulatorConfig {
            bin_bound: 3,
            ..ModulatorConfig::default()
        };
        assert!(matches!(
            apply_modulator(&s, Arm::B, &setting(0.6955, 0.0), &config),
            Err(Error::WindowBound { bound: 3, .. })
        ));
    }

    #[test]
    fn dispersion_trivial_and_override() {
        let bins: Vec<i64> = (1..=6).collect();
        let s = correlated_state::<f64>(&bins).unwrap();
        let s = apply_modulator(&s, Arm::B, &setting(0.3, 0.2), &ModulatorConfig::default()).unwrap();
        assert_eq!(apply_dispersion(&s, &DispersionProfile::none(), Arm::A), s);

        let flipped = apply_dispersion(&s, &DispersionProfile::none().with_override(2, PI), Arm::A);
        for m in s.window_a().bins() {
            for n in s.window_b().bins() {
                let want = if m == 2 { -s.amplitude(m, n) } else { s.amplitude(m, n) };
                assert!((flipped.amplitude(m, n) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn dispersion_quadratic_phase() {
        let profile = DispersionProfile::quadratic(0.1_f64);
        assert!((profile.phase_at(3) - 0.9).abs() < 1e-15);
        assert!((profile.phase_at(-3) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn phase_state_entries() {
        let w = BinWindow::symmetric(5);
        let v = phase_state(0.0_f64, w).unwrap();
        let c = 1.0 / (2.0 * PI).sqrt();
        assert!(v.iter().all(|z| (z.re - c).abs() < 1e-15 && z.im == 0.0));
        assert!(phase_state(0.0_f64, BinWindow::new(0, 1).unwrap()).is_err());
    }
}
