//! Numeric types usable as separation orders.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// A value type for order functions `S -> R`.
///
/// Anything that behaves like an ordered field element works: floats, integers and
/// exact rationals. Only finite values are admitted into a separation system.
pub trait Scalar:
    Num + Copy + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `false` for NaN and infinities.
    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Scalar for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for i32 {}
impl Scalar for i64 {}
impl Scalar for u32 {}
impl Scalar for u64 {}
impl Scalar for Ratio<i64> {}

/// Total comparison for validated (finite) order values.
pub(crate) fn cmp_values<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

/// Converts a count into the scalar type. Counts at desk scale always fit.
pub(crate) fn from_count<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}
