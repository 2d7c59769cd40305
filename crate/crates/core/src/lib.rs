//! Line-of-sight terahertz channel with molecular absorption and
//! re-radiation.
//!
//! Of the power absorbed along the LoS path, a fraction β reaches the
//! receiver ([`reradiation`]). A fraction γ of that arrives as coherent
//! scattering, making the channel Rician; the rest raises the noise floor in
//! proportion to each symbol's energy ([`channel`]). [`modem`] builds the
//! matching unequal-variance ML detectors, [`ser_analysis`] the closed-form
//! error rates and [`simulator`] the Monte-Carlo counterpart.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar: plain names are `f64`, the `F32` suffix is
//! `f32`.

// Negated comparisons such as `!(x > 0)` are used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod absorption;
pub mod channel;
pub mod error;
pub mod modem;
pub mod quadrature;
pub mod reradiation;
pub mod scalar;
pub mod ser_analysis;
pub mod simulator;
pub mod special;
pub mod stats;
pub mod streams;

pub use error::{Error, Result};
pub use modem::Modulation;
pub use scalar::Real;
pub use ser_analysis::{Averaging, ThresholdMode};
pub use simulator::{DetectorSelection, FadingMode, SerEstimate};

pub type AbsorptionProvider = absorption::AbsorptionProvider<f64>;
pub type AbsorptionTable = absorption::AbsorptionTable<f64>;
pub type MediumSpec = absorption::MediumSpec<f64>;
pub type LinkGeometry = reradiation::LinkGeometry<f64>;
pub type LinkBudget = reradiation::LinkBudget<f64>;
pub type QuadratureConfig = quadrature::QuadratureConfig<f64>;
pub type Integrator = quadrature::Integrator<f64>;
pub type ChannelModel = channel::ChannelModel<f64>;
pub type ChannelDraw = channel::ChannelDraw<f64>;
pub type SnrSpec = channel::SnrSpec<f64>;
pub type Constellation = modem::Constellation<f64>;
pub type NoiseProfile = modem::NoiseProfile<f64>;
pub type ThresholdSet = modem::ThresholdSet<f64>;
pub type Detector = modem::Detector<f64>;
pub type SerPoint = ser_analysis::SerPoint<f64>;
pub type SimConfig = simulator::SimConfig<f64>;
pub type SerSimPoint = simulator::SerSimPoint<f64>;
pub type SnrSimConfig = simulator::SnrSimConfig<f64>;
pub type SnrEstimate = simulator::SnrEstimate<f64>;

pub type AbsorptionProviderF32 = absorption::AbsorptionProvider<f32>;
pub type AbsorptionTableF32 = absorption::AbsorptionTable<f32>;
pub type MediumSpecF32 = absorption::MediumSpec<f32>;
pub type LinkGeometryF32 = reradiation::LinkGeometry<f32>;
pub type LinkBudgetF32 = reradiation::LinkBudget<f32>;
pub type QuadratureConfigF32 = quadrature::QuadratureConfig<f32>;
pub type IntegratorF32 = quadrature::Integrator<f32>;
pub type ChannelModelF32 = channel::ChannelModel<f32>;
pub type ChannelDrawF32 = channel::ChannelDraw<f32>;
pub type SnrSpecF32 = channel::SnrSpec<f32>;
pub type ConstellationF32 = modem::Constellation<f32>;
pub type NoiseProfileF32 = modem::NoiseProfile<f32>;
pub type ThresholdSetF32 = modem::ThresholdSet<f32>;
pub type DetectorF32 = modem::Detector<f32>;
pub type SerPointF32 = ser_analysis::SerPoint<f32>;
pub type SimConfigF32 = simulator::SimConfig<f32>;
pub type SerSimPointF32 = simulator::SerSimPoint<f32>;
pub type SnrSimConfigF32 = simulator::SnrSimConfig<f32>;
pub type SnrEstimateF32 = simulator::SnrEstimate<f32>;
