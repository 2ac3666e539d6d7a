//! Floating-point abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the library is generic over: `f32` or `f64`.
///
/// Tolerances quoted throughout the crate assume `f64`; the `f32`
/// instantiation works but can only meet tolerances near its epsilon.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every finite literal used by the crate is
    /// representable (possibly rounded) in both supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal converts to scalar")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count converts to scalar")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Largest magnitude of an exponent handed to `exp` before a computation is
/// reported as overflowing. `exp(700)` is about `1e304`.
pub const EXP_GUARD: f64 = 700.0;

/// `exp(x)` that refuses exponents above [`EXP_GUARD`].
pub(crate) fn guarded_exp<T: Scalar>(exponent: T) -> crate::Result<T> {
    if exponent > T::lit(EXP_GUARD) {
        return Err(crate::Error::Overflow {
            exponent: exponent.to_f64_lossy(),
        });
    }
    Ok(exponent.exp())
}

pub(crate) fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).abs())
        .fold(T::zero(), T::max)
}
