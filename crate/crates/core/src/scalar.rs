//! Scalar and coefficient abstractions.
//!
//! Polynomials are generic over a [`Coefficient`] ring (big integers in the
//! enumerators, machine integers or rationals in tests). Probability
//! evaluation is generic over a [`Scalar`] field so the same sums can run in
//! exact rationals or in `f64`/`f32`.

use std::fmt::Debug;
use std::ops::{AddAssign, Mul, Neg};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};

/// Ring element usable as a polynomial coefficient.
pub trait Coefficient:
    Clone + Debug + PartialEq + Num + Neg<Output = Self> + for<'a> AddAssign<&'a Self> + Send + Sync
{
    fn mul_ref(&self, rhs: &Self) -> Self;
}

impl<T> Coefficient for T
where
    T: Clone + Debug + PartialEq + Num + Neg<Output = T> + for<'a> AddAssign<&'a T> + Send + Sync,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    #[inline]
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
}

/// Field in which error probabilities can be evaluated.
pub trait Scalar: Clone + Debug + Num + PartialOrd {
    fn from_rational(value: &BigRational) -> Self;

    fn from_count(value: u64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(value)))
    }
}

impl Scalar for BigRational {
    fn from_rational(value: &BigRational) -> Self {
        value.clone()
    }
}

impl Scalar for f64 {
    fn from_rational(value: &BigRational) -> Self {
        value.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn from_rational(value: &BigRational) -> Self {
        value.to_f32().unwrap_or(f32::NAN)
    }
}
