//! Rays `y = a x + b, z = c x + d` as 1-surfaces in 3-space.

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::scalar::{Real, Scalar};
use crate::surface::{Dims, Family, Model, ModelTag, ParametricSurface};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray3<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> Ray3<T> {
    /// Ray through `p` and `q`, which must differ in `x`.
    pub fn through(p: [T; 3], q: [T; 3]) -> Option<Self> {
        let dx = q[0] - p[0];
        if dx.abs() < T::lit(1e-12) {
            return None;
        }
        let a = (q[1] - p[1]) / dx;
        let c = (q[2] - p[2]) / dx;
        Some(Self {
            a,
            b: p[1] - a * p[0],
            c,
            d: p[2] - c * p[0],
        })
    }

    pub fn is_valid(&self, slope_cap: T) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|v| v.is_finite())
            && self.a.abs() <= slope_cap
            && self.c.abs() <= slope_cap
    }
}

/// Point on the ray at parameter `x`.
pub fn ray_surface_eval<T: Scalar>(ray: &Ray3<T>, x: T) -> (T, T) {
    (ray.a * x + ray.b, ray.c * x + ray.d)
}

/// Voting axes `(x, y, z)`; `x` free, `(y, z)` dependent.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayFamily;

impl<T: Scalar> Family<T> for RayFamily {
    const TAG: ModelTag = ModelTag::Ray3;
    type Frame<R: Real<T>> = ();
    type Deriv = ();

    fn dims(&self) -> Dims {
        Dims { d: 3, k: 1, l: 2 }
    }

    fn free_axes(&self) -> &[usize] {
        &[0]
    }

    fn dep_axes(&self) -> &[usize] {
        &[1, 2]
    }

    fn axis_names(&self) -> Vec<String> {
        vec!["x".into(), "y".into(), "z".into()]
    }

    fn frame<R: Real<T>>(&self, _x: &[R]) -> Self::Frame<R> {}

    fn eval<R: Real<T>>(&self, _: &(), x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        out[0] = t[0] * x[0];
        out[1] = t[1] * x[0];
        Ok(())
    }

    fn jacobian<R: Real<T>>(&self, _: &(), x: &[R], _t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        let zero = R::c(0.0);
        out[0] = x[0];
        out[1] = zero;
        out[2] = zero;
        out[3] = x[0];
        Ok(())
    }
}

pub fn ray_surface<T: Scalar>(model: &Model<T, RayFamily>, ray: &Ray3<T>, id: u32) -> ParametricSurface<T> {
    model.surface(&[ray.a, ray.c], &[ray.b, ray.d], id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_diagonal_rays() {
        let r = Ray3 { a: 0.0, b: 0.5, c: 0.0, d: 0.5 };
        assert_eq!(ray_surface_eval(&r, 0.3), (0.5, 0.5));
        let r = Ray3 { a: 1.0, b: 0.0, c: 1.0, d: 0.0 };
        assert_eq!(ray_surface_eval(&r, 0.25), (0.25, 0.25));
    }

    #[test]
    fn through_two_points() {
        let r = Ray3::through([0.0, 1.0, 2.0], [1.0, 2.0, 0.0]).unwrap();
        assert_eq!(ray_surface_eval(&r, 1.0), (2.0, 0.0));
        assert!(Ray3::through([0.5, 1.0, 2.0], [0.5, 2.0, 0.0]).is_none());
    }
}
