//! Scalar abstraction shared by the floating point and exact rational paths.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Signed, ToPrimitive};

/// Ordered field element the model code is written against.
///
/// Implemented for `f32`, `f64` and `BigRational`. Anything needing square
/// roots, logarithms or eigenvalues asks for [`Real`] instead.
pub trait Scalar:
    Clone + Debug + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Converts a finite `f64` literal. Rational conversion is exact.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| panic!("{x} is not representable"))
    }

    fn from_usize_lossless(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits every scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn powu(&self, n: usize) -> Self {
        num_traits::pow::pow(self.clone(), n)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Clone + Debug + PartialOrd + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Floating point scalars.
pub trait Real: Scalar + Float + Copy {}

impl<T> Real for T where T: Scalar + Float + Copy {}
