//! Scalar abstraction for the solver core.
//!
//! Everything numeric is generic over [`Real`], a closed set of bounds on top
//! of `num-traits` satisfied by `f32` and `f64`. Concrete aliases live at the
//! crate root.

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

/// Floating-point scalar usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Casts an `f64` constant into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must be representable in the scalar type")
}

#[inline]
pub fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm3<T: Real>(a: [T; 3]) -> T {
    dot3(a, a).sqrt()
}

#[inline]
pub fn add3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale3<T: Real>(s: T, a: [T; 3]) -> [T; 3] {
    [s * a[0], s * a[1], s * a[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_cast_round_trips() {
        let x: f64 = real::<f64>(0.125);
        assert_eq!(x, 0.125);
        let y: f32 = real::<f32>(0.5);
        assert_eq!(y, 0.5f32);
    }

    #[test]
    fn cross_is_orthogonal_to_factors() {
        let a = [1.0f64, 2.0, -0.5];
        let b = [-0.25f64, 1.5, 3.0];
        let c = cross3(a, b);
        assert!(dot3(a, c).abs() < 1e-14);
        assert!(dot3(b, c).abs() < 1e-14);
    }
}
