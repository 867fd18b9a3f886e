use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

/// Floating point scalar used by the closed-form and information-measure code.
pub trait Real: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Absolute tolerance used when checking that probabilities sum to one.
    fn sum_tolerance() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Probabilities below this are treated as exact zeros.
    fn zero_threshold() -> Self {
        Self::lit(1e-15)
    }
}

impl Real for f32 {}
impl Real for f64 {}
