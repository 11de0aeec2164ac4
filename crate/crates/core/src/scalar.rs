//! Scalar abstraction for the run-count formulas.
//!
//! The expectation formulas only need a commutative ring with an order and a
//! way to lift counts into it, so they work unchanged over `f32`, `f64`,
//! [`BigRational`](num_rational::BigRational) and [`Dyadic`](crate::Dyadic).
//! No division is required anywhere on this path.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_traits::{FromPrimitive, One, Zero};

pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + FromPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Clone
        + Debug
        + PartialOrd
        + Zero
        + One
        + FromPrimitive
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
{
}

/// `base^exp` by repeated squaring.
pub fn pow<T: Scalar>(base: &T, mut exp: u64) -> T {
    let mut acc = T::one();
    let mut sq = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * sq.clone();
        }
        exp >>= 1;
        if exp > 0 {
            sq = sq.clone() * sq;
        }
    }
    acc
}
