//! Generic real scalar used throughout the crate.
//!
//! All core math (interpolation predicates, constraint matrices, closed-form
//! rates, the interior-point solver) is written against this trait so it runs
//! with `f32` or `f64`. `f64` is the scalar every documented tolerance is
//! calibrated for; see the type aliases at the crate root.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar with the field operations, ordering, and conversions the crate
/// needs. Blanket-implemented; `f32` and `f64` both qualify.
pub trait Scalar: RealField + FromPrimitive + ToPrimitive + Copy {}

impl<T> Scalar for T where T: RealField + FromPrimitive + ToPrimitive + Copy {}

/// Shorthand to lift an `f64` literal into the working scalar.
#[inline]
pub fn cst<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant not representable in scalar type")
}

/// Lossy conversion back to `f64` (exact for `f64` itself).
#[inline]
pub fn as_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().expect("scalar not convertible to f64")
}
