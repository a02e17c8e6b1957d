//! Closed real intervals with the arithmetic needed for sound enclosures.
//!
//! Rounding is not directed. Callers that need a hard guarantee add
//! [`Scalar::GRID_TOL`] of slack on top of the enclosure.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{cosc_of_sq, sinc_of_sq, Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    #[inline]
    pub fn new(a: T, b: T) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    #[inline]
    pub fn point(v: T) -> Self {
        Self { lo: v, hi: v }
    }

    #[inline]
    pub fn entire() -> Self {
        Self {
            lo: T::neg_infinity(),
            hi: T::infinity(),
        }
    }

    #[inline]
    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    #[inline]
    pub fn mid(&self) -> T {
        self.lo + (self.hi - self.lo) * T::lit(0.5)
    }

    #[inline]
    pub fn contains(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Largest absolute value in the interval.
    #[inline]
    pub fn mag(&self) -> T {
        self.lo.abs().max(self.hi.abs())
    }

    #[inline]
    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    #[inline]
    pub fn inflate(&self, by: T) -> Self {
        Self {
            lo: self.lo - by,
            hi: self.hi + by,
        }
    }

    #[inline]
    pub fn join(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    fn from_products(p: [T; 4]) -> Self {
        if p.iter().any(|v| v.is_nan()) {
            return Self::entire();
        }
        let mut lo = p[0];
        let mut hi = p[0];
        for &v in &p[1..] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Self { lo, hi }
    }
}

impl<T: Scalar> Add for Interval<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }
}

impl<T: Scalar> Sub for Interval<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self {
            lo: self.lo - rhs.hi,
            hi: self.hi - rhs.lo,
        }
    }
}

impl<T: Scalar> Neg for Interval<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl<T: Scalar> Mul for Interval<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        if self.lo == self.hi && rhs.lo == rhs.hi {
            return Self::point(self.lo * rhs.lo);
        }
        Self::from_products([
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ])
    }
}

impl<T: Scalar> Div for Interval<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        if rhs.lo <= T::zero() && rhs.hi >= T::zero() {
            return Self::entire();
        }
        self * Self {
            lo: T::one() / rhs.hi,
            hi: T::one() / rhs.lo,
        }
    }
}

// θ at the first minimum of sin θ / θ, and that minimum.
const SINC_MIN_THETA: f64 = 4.493_409_457_909_064;
const SINC_MIN_VALUE: f64 = -0.217_233_628_211_221_7;

impl<T: Scalar> Real<T> for Interval<T> {
    #[inline]
    fn lift(v: T) -> Self {
        Self::point(v)
    }

    #[inline]
    fn safe_sqrt(self) -> Self {
        Self {
            lo: self.lo.max(T::zero()).sqrt(),
            hi: self.hi.max(T::zero()).sqrt(),
        }
    }

    #[inline]
    fn sq(self) -> Self {
        let a = self.lo * self.lo;
        let b = self.hi * self.hi;
        if self.lo <= T::zero() && self.hi >= T::zero() {
            Self {
                lo: T::zero(),
                hi: a.max(b),
            }
        } else {
            Self::new(a, b)
        }
    }

    #[inline]
    fn guard_nonzero(self, tol: T) -> Option<Self> {
        if !self.is_finite() || (self.lo < tol && self.hi > -tol) {
            None
        } else {
            Some(self)
        }
    }

    fn rodrigues_coeffs(theta_sq: Self) -> (Self, Self) {
        let u_lo = theta_sq.lo.max(T::zero());
        let u_hi = theta_sq.hi.max(u_lo);
        if !u_hi.is_finite() {
            return (
                Self::new(T::lit(SINC_MIN_VALUE), T::one()),
                Self::new(T::zero(), T::lit(0.5)),
            );
        }

        let sinc_knee = T::lit(SINC_MIN_THETA * SINC_MIN_THETA);
        let sinc = if u_hi <= sinc_knee {
            Self::new(sinc_of_sq(u_hi), sinc_of_sq(u_lo))
        } else {
            // past the knee |sin θ / θ| <= 1 / θ
            let upper = if u_lo <= sinc_knee {
                sinc_of_sq(u_lo).max(T::one() / T::lit(SINC_MIN_THETA))
            } else {
                T::one() / u_lo.sqrt()
            };
            Self::new(T::lit(SINC_MIN_VALUE), upper)
        };

        let cosc_knee = T::lit(4.0) * T::PI() * T::PI();
        let cosc = if u_hi <= cosc_knee {
            Self::new(cosc_of_sq(u_hi), cosc_of_sq(u_lo))
        } else {
            let tail = T::lit(2.0) / u_lo.max(cosc_knee);
            Self::new(T::zero(), cosc_of_sq(u_lo.min(cosc_knee)).max(tail))
        };
        (sinc, cosc)
    }

    #[inline]
    fn hull(self) -> Interval<T> {
        self
    }

    #[inline]
    fn clamp_abs(self, bound: T) -> Self {
        Self {
            lo: self.lo.max(-bound),
            hi: self.hi.min(bound),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn division_by_zero_straddle_is_entire() {
        let r = Interval::new(1.0, 2.0) / Interval::new(-1.0, 1.0);
        assert!(!r.is_finite());
    }

    #[test]
    fn square_of_straddling_interval_starts_at_zero() {
        let r = Interval::new(-2.0, 1.0).sq();
        assert_eq!(r, Interval::new(0.0, 4.0));
    }

    #[test]
    fn guard_rejects_near_zero() {
        assert!(Interval::new(-1.0, 1.0).guard_nonzero(1e-6).is_none());
        assert!(Interval::new(1e-7, 1.0).guard_nonzero(1e-6).is_none());
        assert!(Interval::new(0.5, 1.0).guard_nonzero(1e-6).is_some());
    }

    proptest! {
        #[test]
        fn products_enclose_samples(a in -5.0f64..5.0, w1 in 0.0f64..3.0, b in -5.0f64..5.0, w2 in 0.0f64..3.0,
                                    s1 in 0.0f64..1.0, s2 in 0.0f64..1.0) {
            let x = Interval::new(a, a + w1);
            let y = Interval::new(b, b + w2);
            let xv = a + s1 * w1;
            let yv = b + s2 * w2;
            prop_assert!((x * y).contains(xv * yv));
            prop_assert!((x - y).contains(xv - yv));
            if !(y.lo <= 0.0 && y.hi >= 0.0) {
                let q = x / y;
                prop_assert!(q.lo <= xv / yv + 1e-9 && xv / yv <= q.hi + 1e-9);
            }
        }

        #[test]
        fn rodrigues_coefficients_enclose_samples(lo in 0.0f64..45.0, w in 0.0f64..10.0, s in 0.0f64..1.0) {
            let u = Interval::new(lo, lo + w);
            let (a, b) = <Interval<f64> as Real<f64>>::rodrigues_coeffs(u);
            let v = lo + s * w;
            prop_assert!(a.lo <= sinc_of_sq(v) + 1e-12 && sinc_of_sq(v) <= a.hi + 1e-12);
            prop_assert!(b.lo <= cosc_of_sq(v) + 1e-12 && cosc_of_sq(v) <= b.hi + 1e-12);
        }
    }
}
