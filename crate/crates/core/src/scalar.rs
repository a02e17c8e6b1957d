//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Surface equations are written once against [`Real`], which is implemented
//! both for plain floats and for [`Interval`]s. The same code therefore gives
//! point evaluation, interval enclosures over boxes, and enclosures of the
//! essential-parameter Jacobian used by canonization.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

use crate::interval::Interval;

/// Floating point storage type: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Real<Self>
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance for grid-index boundary decisions.
    const GRID_TOL: Self;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("literal representable")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const GRID_TOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const GRID_TOL: f32 = 1e-6;
}

/// Arithmetic needed by surface equations, over either scalars or intervals.
pub trait Real<T: Scalar>:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn lift(v: T) -> Self;

    fn safe_sqrt(self) -> Self;

    /// `self * self`, tight for intervals straddling zero.
    fn sq(self) -> Self;

    /// Returns `None` when `self` may lie within `tol` of zero.
    fn guard_nonzero(self, tol: T) -> Option<Self>;

    /// Rodrigues coefficients `(sin θ / θ, (1 - cos θ) / θ²)` as functions of `θ²`.
    fn rodrigues_coeffs(theta_sq: Self) -> (Self, Self);

    /// Smallest interval containing the value.
    fn hull(self) -> Interval<T>;

    /// Intersects with `[-bound, bound]`; used for quantities known to be
    /// bounded, such as rotation matrix entries.
    fn clamp_abs(self, bound: T) -> Self;

    #[inline]
    fn c(v: f64) -> Self {
        Self::lift(T::lit(v))
    }
}

pub(crate) fn sinc_of_sq<T: Scalar>(u: T) -> T {
    if u < T::lit(1e-6) {
        T::one() - u / T::lit(6.0) + u * u / T::lit(120.0)
    } else {
        let th = u.sqrt();
        th.sin() / th
    }
}

pub(crate) fn cosc_of_sq<T: Scalar>(u: T) -> T {
    if u < T::lit(1e-6) {
        T::lit(0.5) - u / T::lit(24.0) + u * u / T::lit(720.0)
    } else {
        let th = u.sqrt();
        (T::one() - th.cos()) / u
    }
}

macro_rules! impl_real_for_float {
    ($f:ty) => {
        impl Real<$f> for $f {
            #[inline]
            fn lift(v: $f) -> Self {
                v
            }

            #[inline]
            fn safe_sqrt(self) -> Self {
                Float::sqrt(self.max(0.0))
            }

            #[inline]
            fn sq(self) -> Self {
                self * self
            }

            #[inline]
            fn guard_nonzero(self, tol: $f) -> Option<Self> {
                if Float::abs(self) < tol || !self.is_finite() {
                    None
                } else {
                    Some(self)
                }
            }

            #[inline]
            fn rodrigues_coeffs(theta_sq: Self) -> (Self, Self) {
                (sinc_of_sq(theta_sq), cosc_of_sq(theta_sq))
            }

            #[inline]
            fn hull(self) -> Interval<$f> {
                Interval::point(self)
            }

            #[inline]
            fn clamp_abs(self, _bound: $f) -> Self {
                self
            }
        }
    };
}

impl_real_for_float!(f32);
impl_real_for_float!(f64);
