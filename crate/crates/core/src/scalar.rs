//! Scalar types for probabilities.
//!
//! Everything that manipulates probabilities (success model, allocation,
//! estimator) is generic over [`Probability`]. Floating point is used in
//! simulation; exact rationals make the oracle checks tolerance-free.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::Num;

/// A probability-valued scalar: `f32`, `f64`, or an exact rational.
pub trait Probability: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// Two success probabilities closer than this are treated as tied.
    fn tie_tolerance() -> Self;

    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: u64, den: u64) -> Self;

    fn as_f64(self) -> f64;
}

impl Probability for f64 {
    fn tie_tolerance() -> Self {
        1e-12
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn as_f64(self) -> f64 {
        self
    }
}

impl Probability for f32 {
    fn tie_tolerance() -> Self {
        1e-6
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

macro_rules! exact_probability {
    ($int:ty) => {
        impl Probability for Ratio<$int> {
            fn tie_tolerance() -> Self {
                Ratio::from_integer(0)
            }

            fn from_ratio(num: u64, den: u64) -> Self {
                Ratio::new(num as $int, den as $int)
            }

            fn as_f64(self) -> f64 {
                *self.numer() as f64 / *self.denom() as f64
            }
        }
    };
}

exact_probability!(i64);
exact_probability!(i128);

/// `true` when `a` beats `b` by more than the tie tolerance.
pub(crate) fn strictly_greater<P: Probability>(a: P, b: P) -> bool {
    a > b + P::tie_tolerance()
}
