//! Numerical toolkit for the cascade multiterminal source coding network.
//!
//! Encoder 1 observes `X^n` and sends a message at rate `R1` to Encoder 2,
//! which also observes `Y^n` and sends a message at rate `R2` to a decoder
//! that must produce `Z^n` meeting a per-letter distortion target `D`.
//!
//! - [`model`]: sources, distortion tables, kernels and information measures.
//! - [`gaussian`]: closed-form bounds for estimating `X + Y` of a Gaussian pair.
//! - [`region`]: evaluation and search of the inner and outer regions on finite alphabets.
//! - [`simulator`]: Monte Carlo run of the random-coding scheme with binning.
//! - [`presets`]: named configurations used by the CLI and tests.

pub mod error;
pub mod fmt;
pub mod gaussian;
pub mod model;
pub mod presets;
pub mod region;
pub mod scalar;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{DistortionFn, JointSource, Kernel, RateDistortionTriple};
pub use scalar::Real;

/// Double-precision Gaussian pair.
pub type GaussianPair = model::GaussianPair<f64>;
/// Double-precision joint pmf.
pub type JointPmf = model::JointPmf<f64>;
pub type StrategyChoice = gaussian::StrategyChoice<f64>;
pub type SumRateBound = gaussian::SumRateBound<f64>;
