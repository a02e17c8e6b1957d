//! Dual line and hyperplane fitting.
//!
//! A data point `p` becomes the set of fitted models passing through it. For a
//! 2D line `y = a x + b` that set is `b = p2 - a p1`: a line in `(a, b)` space
//! with slope `-p1` (essential) and offset `p2` (free).

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::surface::{Dims, Family, Model, ModelTag, ParametricSurface};
use crate::error::DomainError;

/// Surfaces `x2 = t * x1 + f` in the `(a, b)` plane.
#[derive(Debug, Clone, Copy, Default)]
pub struct Line2;

impl<T: Scalar> Family<T> for Line2 {
    const TAG: ModelTag = ModelTag::Line2;
    type Frame<R: Real<T>> = ();
    type Deriv = ();

    fn dims(&self) -> Dims {
        Dims { d: 2, k: 1, l: 1 }
    }

    fn free_axes(&self) -> &[usize] {
        &[0]
    }

    fn dep_axes(&self) -> &[usize] {
        &[1]
    }

    fn axis_names(&self) -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    fn frame<R: Real<T>>(&self, _x: &[R]) -> Self::Frame<R> {}

    #[inline]
    fn eval<R: Real<T>>(&self, _: &(), x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        out[0] = t[0] * x[0];
        Ok(())
    }

    #[inline]
    fn jacobian<R: Real<T>>(&self, _: &(), x: &[R], _t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        out[0] = x[0];
        Ok(())
    }
}

/// The dual surface of a 2D data point: every `(a, b)` with `p2 = a p1 + b`.
pub fn line_surface_from_point<T: Scalar>(model: &Model<T, Line2>, p: [T; 2], id: u32) -> ParametricSurface<T> {
    model.surface(&[-p[0]], &[p[1]], id)
}

/// Hyperplanes `x_d = a_0 + sum_i a_i x_i` in `d`-space, dualized: a data
/// point becomes the surface `a_0 = x_d - sum_i x_i a_i` over `(a_1..a_{d-1})`.
/// Voting axes are `(a_1, .., a_{d-1}, a_0)`.
#[derive(Debug, Clone)]
pub struct Hyperplane {
    d: usize,
    free: Vec<usize>,
    dep: [usize; 1],
}

impl Hyperplane {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 || d > 8 {
            return Err(Error::InvalidParameter(format!(
                "hyperplane ambient dimension {d} outside 2..=8"
            )));
        }
        Ok(Self {
            d,
            free: (0..d - 1).collect(),
            dep: [d - 1],
        })
    }

    pub fn ambient(&self) -> usize {
        self.d
    }
}

impl<T: Scalar> Family<T> for Hyperplane {
    const TAG: ModelTag = ModelTag::Hyperplane;
    type Frame<R: Real<T>> = ();
    type Deriv = ();

    fn dims(&self) -> Dims {
        Dims {
            d: self.d,
            k: self.d - 1,
            l: self.d - 1,
        }
    }

    fn free_axes(&self) -> &[usize] {
        &self.free
    }

    fn dep_axes(&self) -> &[usize] {
        &self.dep
    }

    fn axis_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..self.d).map(|i| format!("a{i}")).collect();
        names.push("a0".into());
        names
    }

    fn frame<R: Real<T>>(&self, _x: &[R]) -> Self::Frame<R> {}

    fn eval<R: Real<T>>(&self, _: &(), x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        let mut acc = t[0] * x[0];
        for i in 1..x.len() {
            acc = acc + t[i] * x[i];
        }
        out[0] = acc;
        Ok(())
    }

    fn jacobian<R: Real<T>>(&self, _: &(), x: &[R], _t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        out[..x.len()].copy_from_slice(x);
        Ok(())
    }
}

/// Offset `a_0 = x_d - sum_i x_i a_i` of the plane through `point` with
/// slopes `coeffs`.
pub fn hyperplane_surface_eval<T: Scalar>(point: &[T], coeffs: &[T]) -> T {
    let n = point.len() - 1;
    point[n]
        - point[..n]
            .iter()
            .zip(coeffs)
            .fold(T::zero(), |acc, (&x, &a)| acc + x * a)
}

/// The dual surface of a data point in `d`-space.
pub fn hyperplane_surface_from_point<T: Scalar>(
    model: &Model<T, Hyperplane>,
    p: &[T],
    id: u32,
) -> ParametricSurface<T> {
    let n = p.len() - 1;
    let t: Vec<T> = p[..n].iter().map(|&v| -v).collect();
    model.surface(&t, &[p[n]], id)
}
