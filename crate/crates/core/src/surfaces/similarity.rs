//! 2D similarity alignment. A hypothetical match `p -> q` under
//! `q = [[a, b], [-b, a]] p + (c, d)` constrains `(a, b)` given `(c, d)`.

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::scalar::{Real, Scalar};
use crate::surface::{Dims, Family, Model, ModelTag, ParametricSurface};

/// `a = s cos θ`, `b = s sin θ`, translation `(c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityParams<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> SimilarityParams<T> {
    pub fn from_scale_angle(s: T, theta: T, c: T, d: T) -> Self {
        Self {
            a: s * theta.cos(),
            b: s * theta.sin(),
            c,
            d,
        }
    }

    pub fn scale(&self) -> T {
        (self.a * self.a + self.b * self.b).sqrt()
    }

    pub fn apply(&self, p: [T; 2]) -> [T; 2] {
        [
            self.a * p[0] + self.b * p[1] + self.c,
            -self.b * p[0] + self.a * p[1] + self.d,
        ]
    }
}

/// `(a, b)` of the transform taking `p` to `q` for translation `(c, d)`.
pub fn similarity_surface_eval<T: Scalar>(
    p: [T; 2],
    q: [T; 2],
    c: T,
    d: T,
    tol: T,
) -> Result<(T, T), DomainError> {
    let n2 = p[0] * p[0] + p[1] * p[1];
    if n2 < tol {
        return Err(DomainError("similarity source point at origin"));
    }
    let a = -(c * p[0] + d * p[1] - p[0] * q[0] - p[1] * q[1]) / n2;
    let b = -(c * p[1] - d * p[0] - p[1] * q[0] + p[0] * q[1]) / n2;
    Ok((a, b))
}

/// Voting axes `(a, b, c, d)`; `(c, d)` free, `(a, b)` dependent. Essentials
/// are `p / |p|^2`; the two free parameters absorb the `q` terms.
#[derive(Debug, Clone, Copy)]
pub struct Sim2<T> {
    pub origin_tol: T,
}

impl<T: Scalar> Default for Sim2<T> {
    fn default() -> Self {
        Self {
            origin_tol: T::lit(1e-6),
        }
    }
}

impl<T: Scalar> Family<T> for Sim2<T> {
    const TAG: ModelTag = ModelTag::Sim2;
    type Frame<R: Real<T>> = ();
    type Deriv = ();

    fn dims(&self) -> Dims {
        Dims { d: 4, k: 2, l: 2 }
    }

    fn free_axes(&self) -> &[usize] {
        &[2, 3]
    }

    fn dep_axes(&self) -> &[usize] {
        &[0, 1]
    }

    fn axis_names(&self) -> Vec<String> {
        vec!["a".into(), "b".into(), "c".into(), "d".into()]
    }

    fn frame<R: Real<T>>(&self, _x: &[R]) -> Self::Frame<R> {}

    fn eval<R: Real<T>>(&self, _: &(), x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        let (c, d) = (x[0], x[1]);
        let (u, v) = (t[0], t[1]);
        out[0] = -(c * u + d * v);
        out[1] = d * u - c * v;
        Ok(())
    }

    fn jacobian<R: Real<T>>(&self, _: &(), x: &[R], _t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        let (c, d) = (x[0], x[1]);
        out[0] = -c;
        out[1] = -d;
        out[2] = d;
        out[3] = -c;
        Ok(())
    }
}

pub fn similarity_surface<T: Scalar>(
    model: &Model<T, Sim2<T>>,
    p: [T; 2],
    q: [T; 2],
    id: u32,
) -> Result<ParametricSurface<T>, DomainError> {
    let n2 = p[0] * p[0] + p[1] * p[1];
    if n2 < model.family.origin_tol {
        return Err(DomainError("similarity source point at origin"));
    }
    let t = [p[0] / n2, p[1] / n2];
    let f = [
        (p[0] * q[0] + p[1] * q[1]) / n2,
        (p[1] * q[0] - p[0] * q[1]) / n2,
    ];
    Ok(model.surface(&t, &f, id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SpaceMap;

    #[test]
    fn identity_match() {
        let (a, b) = similarity_surface_eval([0.3, -0.4], [0.3, -0.4], 0.0, 0.0, 1e-9).unwrap();
        approx::assert_abs_diff_eq!(a, 1.0, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(b, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn quarter_turn_reproduces_target() {
        let (a, b) = similarity_surface_eval([1.0, 0.0], [0.0, 1.0], 0.0, 0.0, 1e-9).unwrap();
        assert_eq!((a, b), (0.0, -1.0));
        let q = SimilarityParams { a, b, c: 0.0, d: 0.0 }.apply([1.0, 0.0]);
        assert_eq!(q, [0.0, 1.0]);
    }

    #[test]
    fn pure_translation() {
        let (p, q) = ([0.7, 0.2], [1.2, -0.3]);
        let (a, b) = similarity_surface_eval(p, q, q[0] - p[0], q[1] - p[1], 1e-9).unwrap();
        approx::assert_abs_diff_eq!(a, 1.0, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(b, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn origin_is_a_domain_error() {
        assert!(similarity_surface_eval([0.0, 0.0], [1.0, 1.0], 0.0, 0.0, 1e-9).is_err());
    }

    #[test]
    fn model_matches_closed_form() {
        let m = Model::new(
            Sim2::default(),
            SpaceMap::new(vec![-2.0, -2.0, -3.0, -3.0], vec![2.0, 2.0, 3.0, 3.0]).unwrap(),
        )
        .unwrap();
        let (p, q) = ([0.6, -1.1], [2.0, 0.4]);
        let s = similarity_surface(&m, p, q, 0).unwrap();
        let (c, d) = (0.4, -1.3);
        let point = [0.0, 0.0, m.map.to_unit(2, c), m.map.to_unit(3, d)];
        let out = m.eval_at(&point, &s).unwrap();
        let (a, b) = similarity_surface_eval(p, q, c, d, 1e-9).unwrap();
        approx::assert_abs_diff_eq!(m.map.from_unit(0, out[0]), a, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(m.map.from_unit(1, out[1]), b, epsilon = 1e-12);
    }
}
