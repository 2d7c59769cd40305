//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All model code is written against [`Real`], which is implemented for
//! `f32` and `f64`. The special functions that `num-traits` does not cover
//! (complementary error function, log-gamma) and the random variates used by
//! the Monte-Carlo paths are routed through this trait.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};

/// Floating point type usable by the channel model: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Machine epsilon of the type.
    const EPS: Self;

    /// Converts an `f64` literal. Lossy for `f32`.
    fn of(x: f64) -> Self;

    /// Widens to `f64`.
    fn f64(self) -> f64;

    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Natural log of the gamma function for positive arguments.
    fn ln_gamma(self) -> Self;

    /// Draws from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draws uniformly from [0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_real {
    ($t:ty, $erfc:path, $lgamma:path) => {
        impl Real for $t {
            const EPS: Self = <$t>::EPSILON;

            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn erfc(self) -> Self {
                $erfc(self)
            }

            #[inline]
            fn ln_gamma(self) -> Self {
                $lgamma(self)
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }

            #[inline]
            fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardUniform as Distribution<$t>>::sample(&StandardUniform, rng)
            }
        }
    };
}

impl_real!(f64, libm::erfc, libm::lgamma);
impl_real!(f32, libm::erfcf, libm::lgammaf);

/// Gaussian tail probability Q(x) = P(N(0,1) > x).
#[inline]
pub fn q_function<T: Real>(x: T) -> T {
    T::of(0.5) * (x / T::SQRT_2()).erfc()
}

/// Standard normal CDF.
#[inline]
pub fn normal_cdf<T: Real>(x: T) -> T {
    q_function(-x)
}

/// Converts decibels to a linear power ratio.
#[inline]
pub fn db_to_linear<T: Real>(db: T) -> T {
    T::of(10.0).powf(db / T::of(10.0))
}

/// Converts a linear power ratio to decibels.
#[inline]
pub fn linear_to_db<T: Real>(x: T) -> T {
    T::of(10.0) * x.log10()
}
