//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! The continuous engine is written once against [`Real`] and instantiated
//! for `f32` and `f64`. The grid oracle uses the looser [`GridScalar`] so it
//! can also run on exact rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floating point scalar used by the continuous models.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Complementary error function.
    fn complementary_erf(self) -> Self;

    /// Natural log of the gamma function.
    fn log_gamma(self) -> Self;

    /// One draw from N(0, 1).
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from U(0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// A requested absolute tolerance, floored at what the type can resolve.
    #[inline]
    fn tol(requested: f64) -> Self {
        Self::c(requested).max(Self::epsilon() * Self::c(64.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn complementary_erf(self) -> Self {
        libm::erfc(self)
    }

    #[inline]
    fn log_gamma(self) -> Self {
        libm::lgamma(self)
    }

    #[inline]
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }
}

impl Real for f32 {
    #[inline]
    fn complementary_erf(self) -> Self {
        libm::erfcf(self)
    }

    #[inline]
    fn log_gamma(self) -> Self {
        libm::lgammaf(self)
    }

    #[inline]
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    #[inline]
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }
}

/// Probability scalar for exact grid summation.
///
/// `slack` is the rounding allowance used when comparing a computed
/// probability against a level: zero for exact types.
pub trait GridScalar: Num + Clone + PartialOrd + Debug + Send + Sync {
    fn slack() -> Self;

    fn to_f64_lossy(&self) -> f64;
}

impl GridScalar for f64 {
    fn slack() -> Self {
        1e-12
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl GridScalar for Ratio<i64> {
    fn slack() -> Self {
        Ratio::from_integer(0)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl GridScalar for Ratio<i128> {
    fn slack() -> Self {
        Ratio::from_integer(0)
    }

    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}
