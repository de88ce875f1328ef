//! Bayesian interpolation with deep linear networks.
//!
//! The zero-noise posterior of a deep linear network with Gaussian weights is
//! described exactly by Meijer-G functions of the data norm ‖θ*‖². This crate
//! evaluates those functions by contour quadrature ([`meijer`]), provides the
//! large-width expansions in three scaling regimes ([`asymptotics`]), builds
//! evidences and predictive moments on top ([`posterior`], [`select`]), and
//! supplies synthetic data ([`datagen`]) and Monte Carlo checks ([`oracle`]).
//!
//! The analytic modules are generic over [`Real`] (`f32` or `f64`); data
//! generation and the Monte Carlo oracles work in `f64`.

// `!(x > 0)` is used on purpose so that NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Frozen reference values keep every digit they were computed with.
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod asymptotics;
pub mod datagen;
pub mod error;
pub mod gamma;
pub mod meijer;
pub mod model;
pub mod oracle;
pub mod posterior;
pub mod quadrature;
pub mod saddle;
pub mod scalar;
pub mod select;

pub use error::{Error, Result};
pub use meijer::{GArgs, QuadConfig, QuadratureReport, ShiftTarget};
pub use model::{DataSummary, NetworkSpec, Regime};
pub use scalar::Real;

/// Double-precision network specification.
pub type Spec = NetworkSpec<f64>;
/// Double-precision data summary.
pub type Data = DataSummary<f64>;
/// Double-precision G-function arguments.
pub type Args = GArgs<f64>;
/// Double-precision asymptotic regime parameters.
pub type Params = asymptotics::RegimeParams<f64>;
/// Single-precision network specification.
pub type SpecF32 = NetworkSpec<f32>;
/// Single-precision data summary.
pub type DataF32 = DataSummary<f32>;
