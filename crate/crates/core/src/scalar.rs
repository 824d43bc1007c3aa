//! Scalar abstraction shared by the link-budget, scheduling-metric and
//! KPI formulas. Everything numeric in those modules is written against
//! [`Scalar`] so the same code runs in `f32` and `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// floating point: f32 or f64
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(v: u64) -> Self {
        Self::from_u64(v).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// dB → linear power ratio.
#[inline]
pub fn db_to_linear<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

/// Linear power ratio → dB.
#[inline]
pub fn linear_to_db<T: Scalar>(linear: T) -> T {
    T::lit(10.0) * linear.log10()
}
