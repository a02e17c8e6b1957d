//! Absolute camera posing surfaces. A 2D-3D correspondence `(w, ξ, η)` becomes
//! the set of camera poses (and focal lengths) under which `w` is seen at the
//! observed image coordinates.

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::scalar::{Real, Scalar};
use crate::surface::{Dims, Family, Model, ModelTag, ParametricSurface};
use crate::interval::Interval;
use crate::surfaces::rotation::{dot, rotation, rotation_derivatives, Mat3};

/// A 2D-3D match: world point `w` observed at normalized image `(ξ, η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence<T> {
    pub w: [T; 3],
    pub xi: T,
    pub eta: T,
}

impl<T: Scalar> Correspondence<T> {
    pub fn new(w: [T; 3], xi: T, eta: T) -> Self {
        Self { w, xi, eta }
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|v| v.is_finite()) && self.xi.is_finite() && self.eta.is_finite()
    }
}

fn pose5_terms<T: Scalar, R: Real<T>>(
    w1: R,
    w2: R,
    xi: R,
    x: R,
    y: R,
    f: R,
    tol: T,
) -> Result<(R, R, R, R, R), DomainError> {
    let u = w1 - x;
    let v = w2 - y;
    let s = xi * f;
    let num = v - s * u;
    let den = (u + s * v)
        .guard_nonzero(tol)
        .ok_or(DomainError("pose5 orientation denominator vanishes"))?;
    Ok((u, v, s, num, den))
}

/// `(κ, z)` of the 5-DoF surface at camera position `(x, y)` and focal `f`.
pub fn pose5_surface_eval<T: Scalar>(
    c: &Correspondence<T>,
    x: T,
    y: T,
    f: T,
    tol: T,
) -> Result<(T, T), DomainError> {
    if !(f > T::zero()) {
        return Err(DomainError("focal length must be positive"));
    }
    let (u, v, _, num, den) = pose5_terms(c.w[0], c.w[1], c.xi, x, y, f, tol)?;
    let kappa = num / den;
    let z = c.w[2] - c.eta * f * (u * u + v * v).sqrt();
    Ok((kappa, z))
}

/// Known gravity, unknown focal length. Voting axes `(x, y, z, κ, f)`; free
/// `(x, y, f)`, dependent `(z, κ)`. Essentials `(w1, w2, ξ, η)`; `w3` is the
/// free parameter of `z` and `κ` carries an artificial one.
#[derive(Debug, Clone, Copy)]
pub struct Pose5<T> {
    pub denom_tol: T,
}

impl<T: Scalar> Default for Pose5<T> {
    fn default() -> Self {
        Self {
            denom_tol: T::lit(1e-6),
        }
    }
}

impl<T: Scalar> Family<T> for Pose5<T> {
    const TAG: ModelTag = ModelTag::Pose5;
    type Frame<R: Real<T>> = ();
    type Deriv = ();

    fn dims(&self) -> Dims {
        Dims { d: 5, k: 3, l: 4 }
    }

    fn free_axes(&self) -> &[usize] {
        &[0, 1, 4]
    }

    fn dep_axes(&self) -> &[usize] {
        &[2, 3]
    }

    fn axis_names(&self) -> Vec<String> {
        ["x", "y", "z", "kappa", "f"].iter().map(|s| s.to_string()).collect()
    }

    fn frame<R: Real<T>>(&self, _x: &[R]) -> Self::Frame<R> {}

    fn eval<R: Real<T>>(&self, _: &(), x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        let (u, v, _, num, den) = pose5_terms(t[0], t[1], t[2], x[0], x[1], x[2], self.denom_tol)?;
        out[0] = -(t[3] * x[2] * (u.sq() + v.sq()).safe_sqrt());
        out[1] = num / den;
        Ok(())
    }

    fn jacobian<R: Real<T>>(&self, _: &(), x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        let f = x[2];
        let eta = t[3];
        let (u, v, s, num, den) = pose5_terms(t[0], t[1], t[2], x[0], x[1], f, self.denom_tol)?;
        let rho = (u.sq() + v.sq()).safe_sqrt();
        let one = T::one();
        let zero = R::c(0.0);
        out[0] = -(eta * f * (u / rho).clamp_abs(one));
        out[1] = -(eta * f * (v / rho).clamp_abs(one));
        out[2] = zero;
        out[3] = -(f * rho);
        let den2 = den.sq();
        out[4] = (-(s * den) - num) / den2;
        out[5] = (den - num * s) / den2;
        out[6] = f * (-(u * den) - num * v) / den2;
        out[7] = zero;
        Ok(())
    }
}

pub fn pose5_surface<T: Scalar>(
    model: &Model<T, Pose5<T>>,
    c: &Correspondence<T>,
    id: u32,
) -> ParametricSurface<T> {
    model.surface(&[c.w[0], c.w[1], c.xi, c.eta], &[c.w[2], T::zero()], id)
}

fn projective_xy<T: Scalar, R: Real<T>>(rot: &Mat3<R>, t: &[R], z: R, f: R) -> (R, R, R, R) {
    let w = [t[0], t[1], t[2]];
    let m = dot(&rot[2], &w) + z;
    let mf = m / f;
    (
        t[3] * mf - dot(&rot[0], &w),
        t[4] * mf - dot(&rot[1], &w),
        m,
        mf,
    )
}

/// `(x, y)` of the 7-DoF surface at focal `f`, rotation `φ` and depth offset `z`.
pub fn pose7_surface_eval<T: Scalar>(
    c: &Correspondence<T>,
    f: T,
    phi: [T; 3],
    z: T,
) -> Result<(T, T), DomainError> {
    if !(f > T::zero()) {
        return Err(DomainError("focal length must be positive"));
    }
    let rot = rotation::<T, T>(&phi);
    let t = [c.w[0], c.w[1], c.w[2], c.xi, c.eta];
    let (x, y, _, _) = projective_xy(&rot, &t, z, f);
    Ok((x, y))
}

/// The calibrated specialization, `f = 1`.
pub fn pose6_surface_eval<T: Scalar>(
    c: &Correspondence<T>,
    phi: [T; 3],
    z: T,
) -> Result<(T, T), DomainError> {
    pose7_surface_eval(c, T::one(), phi, z)
}

fn projective_jacobian<T: Scalar, R: Real<T>>(rot: &Mat3<R>, t: &[R], mf: R, f: R, out: &mut [R]) {
    let zero = R::c(0.0);
    for i in 0..3 {
        out[i] = t[3] * rot[2][i] / f - rot[0][i];
        out[5 + i] = t[4] * rot[2][i] / f - rot[1][i];
    }
    out[3] = mf;
    out[4] = zero;
    out[8] = zero;
    out[9] = mf;
}

// d(x, y)/dφ_i of the projective surfaces: `ξ/f · ∂(r3·w) - ∂(r1·w)` and
// likewise for `η`, written at `out[1 + i]` and `out[k + 1 + i]`.
fn projective_phi_jacobian<T: Scalar>(
    d: &[Mat3<Interval<T>>; 3],
    t: &[Interval<T>],
    inv_f: Interval<T>,
    k: usize,
    out: &mut [Interval<T>],
) {
    let w = [t[0], t[1], t[2]];
    let (sx, sy) = (t[3] * inv_f, t[4] * inv_f);
    for i in 0..3 {
        let dm = dot(&d[i][2], &w);
        out[1 + i] = sx * dm - dot(&d[i][0], &w);
        out[k + 1 + i] = sy * dm - dot(&d[i][1], &w);
    }
}

fn focal_in_range<T: Scalar, R: Real<T>>(f: R, f_min: T) -> Result<(), DomainError> {
    let h = f.hull();
    if h.lo < f_min || !h.is_finite() {
        Err(DomainError("focal length below range"))
    } else {
        Ok(())
    }
}

/// Unknown focal length. Voting axes `(x, y, z, φ1, φ2, φ3, f)`; free
/// `(z, φ, f)`, dependent `(x, y)`. Essentials `(w1, w2, w3, ξ, η)`; both free
/// parameters are artificial.
#[derive(Debug, Clone, Copy)]
pub struct Pose7<T> {
    pub f_min: T,
}

impl<T: Scalar> Default for Pose7<T> {
    fn default() -> Self {
        Self { f_min: T::lit(1e-3) }
    }
}

impl<T: Scalar> Family<T> for Pose7<T> {
    const TAG: ModelTag = ModelTag::Pose7;
    type Frame<R: Real<T>> = Mat3<R>;
    type Deriv = [Mat3<Interval<T>>; 3];

    fn dims(&self) -> Dims {
        Dims { d: 7, k: 5, l: 5 }
    }

    fn free_axes(&self) -> &[usize] {
        &[2, 3, 4, 5, 6]
    }

    fn dep_axes(&self) -> &[usize] {
        &[0, 1]
    }

    fn axis_names(&self) -> Vec<String> {
        ["x", "y", "z", "phi1", "phi2", "phi3", "f"].iter().map(|s| s.to_string()).collect()
    }

    fn frame<R: Real<T>>(&self, x: &[R]) -> Mat3<R> {
        rotation::<T, R>(&x[1..4])
    }

    fn eval<R: Real<T>>(&self, rot: &Mat3<R>, x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        focal_in_range(x[4], self.f_min)?;
        let (px, py, _, _) = projective_xy(rot, t, x[0], x[4]);
        out[0] = px;
        out[1] = py;
        Ok(())
    }

    fn jacobian<R: Real<T>>(&self, rot: &Mat3<R>, x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        focal_in_range(x[4], self.f_min)?;
        let (_, _, _, mf) = projective_xy(rot, t, x[0], x[4]);
        projective_jacobian(rot, t, mf, x[4], out);
        Ok(())
    }

    fn deriv_frame(&self, x: &[Interval<T>]) -> Option<Self::Deriv> {
        rotation_derivatives(&x[1..4])
    }

    fn free_jacobian(
        &self,
        d: &Self::Deriv,
        rot: &Mat3<Interval<T>>,
        x: &[Interval<T>],
        t: &[Interval<T>],
        out: &mut [Interval<T>],
    ) -> Result<(), DomainError> {
        focal_in_range(x[4], self.f_min)?;
        let f = x[4];
        let inv_f = Interval::point(T::one()) / f;
        let w = [t[0], t[1], t[2]];
        let m = dot(&rot[2], &w) + x[0];
        out[0] = t[3] * inv_f;
        out[5] = t[4] * inv_f;
        projective_phi_jacobian(d, t, inv_f, 5, out);
        let mf2 = m / f.sq();
        out[4] = -(t[3] * mf2);
        out[9] = -(t[4] * mf2);
        Ok(())
    }
}

/// Calibrated camera. Voting axes `(x, y, z, φ1, φ2, φ3)`; free `(z, φ)`,
/// dependent `(x, y)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pose6;

impl<T: Scalar> Family<T> for Pose6 {
    const TAG: ModelTag = ModelTag::Pose6;
    type Frame<R: Real<T>> = Mat3<R>;
    type Deriv = [Mat3<Interval<T>>; 3];

    fn dims(&self) -> Dims {
        Dims { d: 6, k: 4, l: 5 }
    }

    fn free_axes(&self) -> &[usize] {
        &[2, 3, 4, 5]
    }

    fn dep_axes(&self) -> &[usize] {
        &[0, 1]
    }

    fn axis_names(&self) -> Vec<String> {
        ["x", "y", "z", "phi1", "phi2", "phi3"].iter().map(|s| s.to_string()).collect()
    }

    fn frame<R: Real<T>>(&self, x: &[R]) -> Mat3<R> {
        rotation::<T, R>(&x[1..4])
    }

    fn eval<R: Real<T>>(&self, rot: &Mat3<R>, x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        let (px, py, _, _) = projective_xy(rot, t, x[0], R::c(1.0));
        out[0] = px;
        out[1] = py;
        Ok(())
    }

    fn jacobian<R: Real<T>>(&self, rot: &Mat3<R>, x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        let one = R::c(1.0);
        let (_, _, _, mf) = projective_xy(rot, t, x[0], one);
        projective_jacobian(rot, t, mf, one, out);
        Ok(())
    }

    fn deriv_frame(&self, x: &[Interval<T>]) -> Option<Self::Deriv> {
        rotation_derivatives(&x[1..4])
    }

    fn free_jacobian(
        &self,
        d: &Self::Deriv,
        _rot: &Mat3<Interval<T>>,
        _x: &[Interval<T>],
        t: &[Interval<T>],
        out: &mut [Interval<T>],
    ) -> Result<(), DomainError> {
        out[0] = t[3];
        out[4] = t[4];
        projective_phi_jacobian(d, t, Interval::point(T::one()), 4, out);
        Ok(())
    }
}

/// Surface of `c` for either projective family.
pub fn projective_surface<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    c: &Correspondence<T>,
    id: u32,
) -> ParametricSurface<T> {
    model.surface(&[c.w[0], c.w[1], c.w[2], c.xi, c.eta], &[T::zero(), T::zero()], id)
}

/// `x` of the radial surface at `y` and rotation `φ`.
pub fn radial5_surface_eval<T: Scalar>(
    c: &Correspondence<T>,
    y: T,
    phi: [T; 3],
    tol: T,
) -> Result<T, DomainError> {
    let rot = rotation::<T, T>(&phi);
    let xi = c
        .xi
        .guard_nonzero(tol)
        .ok_or(DomainError("radial image coordinate vanishes"))?;
    Ok(c.eta * (dot(&rot[0], &c.w) - y) / xi - dot(&rot[1], &c.w))
}

/// Radial camera, first stage. Voting axes `(x, y, φ1, φ2, φ3)`; free `(y, φ)`,
/// dependent `x`. Essentials `(w1, w2, w3, ξ, η)`; the free parameter is
/// artificial.
#[derive(Debug, Clone, Copy)]
pub struct Radial5<T> {
    pub xi_tol: T,
}

impl<T: Scalar> Default for Radial5<T> {
    fn default() -> Self {
        Self { xi_tol: T::lit(1e-6) }
    }
}

impl<T: Scalar> Family<T> for Radial5<T> {
    const TAG: ModelTag = ModelTag::Radial5;
    type Frame<R: Real<T>> = Mat3<R>;
    type Deriv = [Mat3<Interval<T>>; 3];

    fn dims(&self) -> Dims {
        Dims { d: 5, k: 4, l: 5 }
    }

    fn free_axes(&self) -> &[usize] {
        &[1, 2, 3, 4]
    }

    fn dep_axes(&self) -> &[usize] {
        &[0]
    }

    fn axis_names(&self) -> Vec<String> {
        ["x", "y", "phi1", "phi2", "phi3"].iter().map(|s| s.to_string()).collect()
    }

    fn frame<R: Real<T>>(&self, x: &[R]) -> Mat3<R> {
        rotation::<T, R>(&x[1..4])
    }

    fn eval<R: Real<T>>(&self, rot: &Mat3<R>, x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        let w = [t[0], t[1], t[2]];
        let xi = t[3]
            .guard_nonzero(self.xi_tol)
            .ok_or(DomainError("radial image coordinate vanishes"))?;
        out[0] = t[4] * (dot(&rot[0], &w) - x[0]) / xi - dot(&rot[1], &w);
        Ok(())
    }

    fn jacobian<R: Real<T>>(&self, rot: &Mat3<R>, x: &[R], t: &[R], out: &mut [R]) -> Result<(), DomainError> {
        let w = [t[0], t[1], t[2]];
        let xi = t[3]
            .guard_nonzero(self.xi_tol)
            .ok_or(DomainError("radial image coordinate vanishes"))?;
        let eta = t[4];
        let a = dot(&rot[0], &w) - x[0];
        for i in 0..3 {
            out[i] = eta * rot[0][i] / xi - rot[1][i];
        }
        out[3] = -(eta * a / xi.sq());
        out[4] = a / xi;
        Ok(())
    }

    fn deriv_frame(&self, x: &[Interval<T>]) -> Option<Self::Deriv> {
        rotation_derivatives(&x[1..4])
    }

    fn free_jacobian(
        &self,
        d: &Self::Deriv,
        _rot: &Mat3<Interval<T>>,
        _x: &[Interval<T>],
        t: &[Interval<T>],
        out: &mut [Interval<T>],
    ) -> Result<(), DomainError> {
        let w = [t[0], t[1], t[2]];
        let xi = t[3]
            .guard_nonzero(self.xi_tol)
            .ok_or(DomainError("radial image coordinate vanishes"))?;
        let s = t[4] / xi;
        out[0] = -s;
        for i in 0..3 {
            out[1 + i] = s * dot(&d[i][0], &w) - dot(&d[i][1], &w);
        }
        Ok(())
    }
}

pub fn radial5_surface<T: Scalar>(
    model: &Model<T, Radial5<T>>,
    c: &Correspondence<T>,
    id: u32,
) -> ParametricSurface<T> {
    model.surface(&[c.w[0], c.w[1], c.w[2], c.xi, c.eta], &[T::zero()], id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pose5_examples() {
        let c = Correspondence::new([1.0, 0.0, 0.0], 0.0, 0.0);
        assert_eq!(pose5_surface_eval(&c, 0.0, 0.0, 1.0, 1e-6).unwrap(), (0.0, 0.0));
        let c = Correspondence::new([2.0, 1.0, 3.0], 0.0, 1.0);
        let (k, z) = pose5_surface_eval(&c, 1.0, 1.0, 1.0, 1e-6).unwrap();
        assert_abs_diff_eq!(k, 0.0);
        assert_abs_diff_eq!(z, 2.0);
        let c = Correspondence::new([0.4, -2.0, 7.5], 0.3, 0.0);
        for (x, y, f) in [(0.0, 0.0, 1.0), (3.0, -1.0, 0.7)] {
            assert_eq!(pose5_surface_eval(&c, x, y, f, 1e-6).unwrap().1, 7.5);
        }
    }

    #[test]
    fn pose5_singular_denominator() {
        let c = Correspondence::new([0.0, 1.0, 0.0], 0.0, 0.0);
        assert!(pose5_surface_eval(&c, 0.0, 1.0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn pose7_examples() {
        let c = Correspondence::new([0.0, 0.0, 1.0], 0.0, 0.0);
        assert_eq!(pose7_surface_eval(&c, 1.0, [0.0; 3], 0.0).unwrap(), (0.0, 0.0));
        let c = Correspondence::new([0.0, 0.0, 1.0], 0.5, 0.0);
        let (x, y) = pose7_surface_eval(&c, 2.0, [0.0; 3], 1.0).unwrap();
        assert_abs_diff_eq!(x, 0.5);
        assert_abs_diff_eq!(y, 0.0);
        let c = Correspondence::new([0.3, -0.2, 2.0], 0.4, -0.1);
        let phi = [0.1, 0.2, -0.3];
        let x1 = pose7_surface_eval(&c, 1.0, phi, 0.5).unwrap().0;
        let x2 = pose7_surface_eval(&c, 2.0, phi, 0.5).unwrap().0;
        let rot = rotation::<f64, f64>(&phi);
        let m = dot(&rot[2], &c.w) + 0.5;
        assert_abs_diff_eq!(x2 - x1, -c.xi * m / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn pose6_is_unit_focal() {
        let c = Correspondence::new([0.3, -0.2, 2.0], 0.4, -0.1);
        assert_eq!(
            pose6_surface_eval(&c, [0.1, 0.0, 0.2], 1.5).unwrap(),
            pose7_surface_eval(&c, 1.0, [0.1, 0.0, 0.2], 1.5).unwrap()
        );
    }

    #[test]
    fn radial_examples() {
        let c = Correspondence::new([1.0, 2.0, 0.0], 1.0, 1.0);
        assert_abs_diff_eq!(radial5_surface_eval(&c, 0.0, [0.0; 3], 1e-6).unwrap(), -1.0);
        let c = Correspondence::new([0.5, -1.0, 2.0], 0.7, 0.0);
        let phi = [0.2, -0.1, 0.4];
        let expect = -dot(&rotation::<f64, f64>(&phi)[1], &c.w);
        for y in [-1.0, 0.0, 3.0] {
            assert_abs_diff_eq!(radial5_surface_eval(&c, y, phi, 1e-6).unwrap(), expect, epsilon = 1e-12);
        }
        let c = Correspondence::new([0.5, -1.0, 2.0], 0.7, 0.3);
        let scaled = Correspondence::new(c.w, -2.1, -0.9);
        assert_abs_diff_eq!(
            radial5_surface_eval(&c, 0.4, phi, 1e-6).unwrap(),
            radial5_surface_eval(&scaled, 0.4, phi, 1e-6).unwrap(),
            epsilon = 1e-12
        );
        assert!(radial5_surface_eval(&Correspondence::new(c.w, 0.0, 1.0), 0.0, phi, 1e-6).is_err());
    }
}
