//! Nonparametric estimation for a zero-inflated two-sample compound mixture.
//!
//! The X sample follows `p·δ0 + (1 - p)·F1`; the Y sample mixes that
//! distribution with weight `1 - lambda` and an unknown positive `F2` with weight
//! `lambda`. The crate provides the binomial/plug-in and empirical-likelihood
//! estimators, the maximum multinomial likelihood estimator fitted by EM with
//! isotonic M-steps, bootstrap inference, kernel posterior curves and a
//! Monte Carlo harness.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases
//! below fix the scalar to `f64`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod bootstrap;
pub mod error;
pub mod estimate;
pub mod isotonic;
pub mod mml;
pub mod posterior;
pub mod sample;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use estimate::{lambda_star, Flag, Method, MixtureEstimate};
pub use scalar::Scalar;

pub type ZeroInflatedSample64 = sample::ZeroInflatedSample<f64>;
pub type TwoSampleData64 = sample::TwoSampleData<f64>;
pub type EvalGrid64 = sample::EvalGrid<f64>;
pub type GridCdf64 = sample::GridCdf<f64>;
pub type MixtureEstimate64 = estimate::MixtureEstimate<f64>;
pub type GridCounts64 = mml::GridCounts<f64>;
pub type EmState64 = mml::EmState<f64>;

pub type TwoSampleData32 = sample::TwoSampleData<f32>;
pub type MixtureEstimate32 = estimate::MixtureEstimate<f32>;
pub type DensityEstimate64 = posterior::DensityEstimate<f64>;
