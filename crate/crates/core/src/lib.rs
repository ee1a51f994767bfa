//! Simulation and analysis toolkit for frequency-bin entangled photon pairs
//! driven by electro-optic phase modulators and measured with even/odd
//! interleavers.
//!
//! The numerical modules ([`specialfn`], [`binspace`], [`closedform`],
//! [`bell`]) are generic over the [`Real`] scalar (`f32` or `f64`); the
//! `*64` aliases below fix the usual double-precision instantiation.
//! [`counts`] works in `f64`.

pub mod bell;
pub mod binspace;
pub mod closedform;
pub mod counts;
pub mod error;
pub mod optim;
pub mod scalar;
pub mod specialfn;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TruncationPolicy64 = specialfn::TruncationPolicy<f64>;
pub type ModulationSetting64 = binspace::ModulationSetting<f64>;
pub type TwoPhotonState64 = binspace::TwoPhotonState<f64>;
pub type DispersionProfile64 = binspace::DispersionProfile<f64>;
pub type ModulatorConfig64 = binspace::ModulatorConfig<f64>;
pub type EffectiveDrive64 = closedform::EffectiveDrive<f64>;
pub type ProbTable64 = closedform::ProbTable<f64>;
pub type SettingQuad64 = bell::SettingQuad<f64>;
pub type ChshReport64 = bell::ChshReport<f64>;
pub type MeasurementModel64 = counts::MeasurementModel<f64>;

pub type ModulationSetting32 = binspace::ModulationSetting<f32>;
pub type TwoPhotonState32 = binspace::TwoPhotonState<f32>;
pub type ProbTable32 = closedform::ProbTable<f32>;
pub type SettingQuad32 = bell::SettingQuad<f32>;
