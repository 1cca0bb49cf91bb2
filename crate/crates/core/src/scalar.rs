//! Scalar abstraction shared by the field and the integrator.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the flow and the integrator are generic over.
///
/// Implemented for `f32` and `f64`. The shooting layer works in `f64`
/// only, since its bracket and corner tolerances sit below `f32` resolution.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal. Every literal used in this crate is
    /// representable (possibly rounded) in both implementors.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }
}

impl Real for f32 {}
impl Real for f64 {}
