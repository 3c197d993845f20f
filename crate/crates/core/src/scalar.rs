use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real floating point scalar used throughout the crate: `f32` or `f64`.
///
/// Default tolerances are per type since a single relative threshold cannot
/// serve both precisions.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    const DEFAULT_REL_EPS: f64;
    const DEFAULT_ABS_EPS: f64;

    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 converts")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const DEFAULT_REL_EPS: f64 = 1e-9;
    const DEFAULT_ABS_EPS: f64 = 1e-12;
}

impl Scalar for f32 {
    const DEFAULT_REL_EPS: f64 = 1e-4;
    const DEFAULT_ABS_EPS: f64 = 1e-6;
}
