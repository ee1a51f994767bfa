//! Infinite-comb model of the two-photon parity statistics.
//!
//! For a flat comb of correlated bins, modulating the two arms with
//! `(a, α)` and `(b, β)` is equivalent to a single effective drive
//! `D e^{iΔ} = a e^{iα} + b e^{iβ}`, and the parity coincidences are
//! `P(E,E) = P(O,O) = ¼[1 + J₀(2D)]`, `P(E,O) = P(O,E) = ¼[1 − J₀(2D)]`.
//! [`phase_average_oracle`] reaches the same numbers by integrating over
//! the phase-state label instead of using the Bessel identity.

use serde::{Deserialize, Serialize};

use crate::binspace::ModulationSetting;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specialfn::bessel_j;

/// Minimum number of quadrature nodes accepted by [`phase_average_oracle`].
pub const MIN_QUADRATURE_POINTS: usize = 64;

/// Default number of quadrature nodes.
pub const DEFAULT_QUADRATURE_POINTS: usize = 256;

/// Combined amplitude `d >= 0` and phase `delta` of the two arms' drives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDrive<T = f64> {
    pub d: T,
    pub delta: T,
}

/// Parity coincidence probabilities for one setting pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProbTable<T = f64> {
    pub p_ee: T,
    pub p_eo: T,
    pub p_oe: T,
    pub p_oo: T,
}

impl<T: Real> ProbTable<T> {
    pub fn new(p_ee: T, p_eo: T, p_oe: T, p_oo: T) -> Self {
        Self { p_ee, p_eo, p_oe, p_oo }
    }

    /// Order: EE, EO, OE, OO.
    pub fn as_array(&self) -> [T; 4] {
        [self.p_ee, self.p_eo, self.p_oe, self.p_oo]
    }

    pub fn from_array(p: [T; 4]) -> Self {
        Self::new(p[0], p[1], p[2], p[3])
    }

    pub fn total(&self) -> T {
        self.p_ee + self.p_eo + self.p_oe + self.p_oo
    }

    /// `P(E,E) − P(E,O) − P(O,E) + P(O,O)`, unnormalized.
    pub fn correlator(&self) -> T {
        self.p_ee - self.p_eo - self.p_oe + self.p_oo
    }

    /// Correlator conditioned on detection (divided by the table total).
    pub fn normalized_correlator(&self) -> T {
        let total = self.total();
        if total > T::zero() {
            self.correlator() / total
        } else {
            T::zero()
        }
    }

    /// Independent per-photon parity flips with probability `chi`.
    pub fn with_crosstalk(&self, chi: T) -> Self {
        if chi == T::zero() {
            return *self;
        }
        let keep = T::one() - chi;
        let p = self.as_array();
        // Row/column index: 0 = even, 1 = odd.
        let idx = |x: usize, y: usize| 2 * x + y;
        let route = |from: usize, to: usize| if from == to { keep } else { chi };
        let mut out = [T::zero(); 4];
        for x in 0..2 {
            for y in 0..2 {
                let mut acc = T::zero();
                for xs in 0..2 {
                    for ys in 0..2 {
                        acc += route(xs, x) * route(ys, y) * p[idx(xs, ys)];
                    }
                }
                out[idx(x, y)] = acc;
            }
        }
        Self::from_array(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }

    pub fn cast<U: Real>(&self) -> ProbTable<U> {
        ProbTable::from_array(self.as_array().map(|v| U::lit(v.to_f64_lossy())))
    }
}

/// Phasor sum of the two settings. `delta` is 0 when `d` vanishes.
pub fn effective_drive<T: Real>(
    a_setting: &ModulationSetting<T>,
    b_setting: &ModulationSetting<T>,
) -> EffectiveDrive<T> {
    let (a, alpha) = (a_setting.amplitude(), a_setting.phase());
    let (b, beta) = (b_setting.amplitude(), b_setting.phase());
    let d2 = a * a + b * b + T::lit(2.0) * a * b * (alpha - beta).cos();
    let d = d2.max(T::zero()).sqrt();
    let y = a * alpha.sin() + b * beta.sin();
    let x = a * alpha.cos() + b * beta.cos();
    let delta = if d == T::zero() { T::zero() } else { y.atan2(x) };
    EffectiveDrive { d, delta }
}

/// `p_ee = p_oo = ¼[1 + J₀(2d)]`, `p_eo = p_oe = ¼[1 − J₀(2d)]`.
pub fn ideal_probabilities<T: Real>(drive: &EffectiveDrive<T>) -> Result<ProbTable<T>> {
    let j0 = bessel_j(0, T::lit(2.0) * drive.d)?;
    let quarter = T::lit(0.25);
    let same = quarter * (T::one() + j0);
    let cross = quarter * (T::one() - j0);
    Ok(ProbTable::new(same, cross, cross, same))
}

/// Convenience: `ideal_probabilities(effective_drive(a, b))`.
pub fn ideal_probabilities_for<T: Real>(
    a_setting: &ModulationSetting<T>,
    b_setting: &ModulationSetting<T>,
) -> Result<ProbTable<T>> {
    ideal_probabilities(&effective_drive(a_setting, b_setting))
}

/// Integrates `cos²(θ_A(φ) + θ_B(φ))` and `sin²(…)` over `φ ∈ [0, π)` with
/// `θ_A = a cos(φ − α)`, `θ_B = b cos(φ − β)`.
///
/// The integrand is smooth and π-periodic, so the equally spaced rectangle
/// rule converges spectrally.
pub fn phase_average_oracle<T: Real>(
    a_setting: &ModulationSetting<T>,
    b_setting: &ModulationSetting<T>,
    quadrature_points: usize,
) -> Result<ProbTable<T>> {
    if quadrature_points < MIN_QUADRATURE_POINTS {
        return Err(Error::TooFewPoints {
            got: quadrature_points,
            min: MIN_QUADRATURE_POINTS,
        });
    }
    let (a, alpha) = (a_setting.amplitude(), a_setting.phase());
    let (b, beta) = (b_setting.amplitude(), b_setting.phase());
    let step = T::PI() / T::from_int(quadrature_points as i64);
    let mut cos2 = T::zero();
    let mut sin2 = T::zero();
    for k in 0..quadrature_points {
        let phi = T::from_int(k as i64) * step;
        let theta = a * (phi - alpha).cos() + b * (phi - beta).cos();
        let c = theta.cos();
        let s = theta.sin();
        cos2 += c * c;
        sin2 += s * s;
    }
    // (1/2π) ∫_0^π f dφ ≈ (1/2π) · step · Σ f = Σ f / (2N).
    let scale = T::lit(2.0) * T::from_int(quadrature_points as i64);
    let same = cos2 / scale;
    let cross = sin2 / scale;
    Ok(ProbTable::new(same, cross, cross, same))
}
