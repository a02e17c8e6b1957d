//! Pose hypotheses, forward projection and angular verification.

use serde::{Deserialize, Serialize};

use crate::error::{DomainError, Error, Result};
use crate::scalar::Scalar;
use crate::surface::ModelTag;
use crate::surfaces::pose::Correspondence;
use crate::surfaces::rotation::{dot, mat_vec, rotation, transpose, Mat3};

/// A camera pose. For the projective models `position` is the translation
/// `t` of `x_cam = R(φ) w + t`; for the gravity model it is the camera center
/// and `kappa = tan θ`; for the radial model only `position[0..2]` is used,
/// and the voting coordinates are `x = t2`, `y = -t1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseHypothesis<T> {
    pub position: [T; 3],
    pub kappa: T,
    pub phi: [T; 3],
    pub focal: T,
}

impl<T: Scalar> PoseHypothesis<T> {
    pub fn projective(phi: [T; 3], t: [T; 3], focal: T) -> Self {
        Self {
            position: t,
            kappa: T::zero(),
            phi,
            focal,
        }
    }

    pub fn gravity(center: [T; 3], kappa: T, focal: T) -> Self {
        Self {
            position: center,
            kappa,
            phi: [T::zero(); 3],
            focal,
        }
    }

    pub fn rotation(&self) -> Mat3<T> {
        rotation::<T, T>(&self.phi)
    }

    /// Camera center `C = -Rᵀ t` of a projective pose.
    pub fn camera_center(&self) -> [T; 3] {
        let c = mat_vec(&transpose(&self.rotation()), &self.position);
        [-c[0], -c[1], -c[2]]
    }

    /// Reads a hypothesis from a physical voting-space point of `tag`.
    pub fn from_point(tag: ModelTag, p: &[T]) -> Result<Self> {
        let need = tag.expected_dims(p.len()).d;
        if tag.is_pose() && p.len() != need {
            return Err(Error::Dimension {
                expected: need,
                got: p.len(),
            });
        }
        let z = T::zero();
        Ok(match tag {
            ModelTag::Pose5 => Self::gravity([p[0], p[1], p[2]], p[3], p[4]),
            ModelTag::Pose6 => Self::projective([p[3], p[4], p[5]], [p[0], p[1], p[2]], T::one()),
            ModelTag::Pose7 => Self::projective([p[3], p[4], p[5]], [p[0], p[1], p[2]], p[6]),
            ModelTag::Radial5 => Self::projective([p[2], p[3], p[4]], [-p[1], p[0], z], T::one()),
            other => {
                return Err(Error::InvalidParameter(format!("{other} is not a pose model")))
            }
        })
    }

    /// Inverse of [`Self::from_point`].
    pub fn to_point(&self, tag: ModelTag) -> Result<Vec<T>> {
        let [a, b, c] = self.position;
        let [p1, p2, p3] = self.phi;
        Ok(match tag {
            ModelTag::Pose5 => vec![a, b, c, self.kappa, self.focal],
            ModelTag::Pose6 => vec![a, b, c, p1, p2, p3],
            ModelTag::Pose7 => vec![a, b, c, p1, p2, p3, self.focal],
            ModelTag::Radial5 => vec![b, -a, p1, p2, p3],
            other => {
                return Err(Error::InvalidParameter(format!("{other} is not a pose model")))
            }
        })
    }
}

fn angle_between<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> Result<T, DomainError> {
    let na = dot::<T, T>(a, a).sqrt();
    let nb = dot::<T, T>(b, b).sqrt();
    if !(na > T::zero() && nb > T::zero()) {
        return Err(DomainError("zero-length direction"));
    }
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let s = dot::<T, T>(&cross, &cross).sqrt();
    Ok(s.atan2(dot::<T, T>(a, b)))
}

/// Image coordinates of `w` under a projective pose, or `None` behind the camera.
pub fn project<T: Scalar>(pose: &PoseHypothesis<T>, w: &[T; 3]) -> Option<(T, T)> {
    let r = pose.rotation();
    let m = dot::<T, T>(&r[2], w) + pose.position[2];
    if !(m > T::zero()) {
        return None;
    }
    Some((
        pose.focal * (dot::<T, T>(&r[0], w) + pose.position[0]) / m,
        pose.focal * (dot::<T, T>(&r[1], w) + pose.position[1]) / m,
    ))
}

/// Angle between the observed bearing and the direction to `w` for a
/// projective pose. Points behind the camera come out near π.
pub fn reprojection_angular_error<T: Scalar>(
    pose: &PoseHypothesis<T>,
    c: &Correspondence<T>,
) -> Result<T, DomainError> {
    if !(pose.focal > T::zero()) {
        return Err(DomainError("focal length must be positive"));
    }
    let r = pose.rotation();
    let cam = [
        dot::<T, T>(&r[0], &c.w) + pose.position[0],
        dot::<T, T>(&r[1], &c.w) + pose.position[1],
        dot::<T, T>(&r[2], &c.w) + pose.position[2],
    ];
    let bearing = [c.xi / pose.focal, c.eta / pose.focal, T::one()];
    angle_between(&bearing, &cam)
}

/// Gravity-aligned camera: the image abscissa `ξ f` is the tangent of the
/// azimuth offset from the heading `θ`, and `η f` is the tangent of the
/// elevation. Returns `None` for points behind the heading.
pub fn project_gravity<T: Scalar>(pose: &PoseHypothesis<T>, w: &[T; 3]) -> Option<(T, T)> {
    let (u, v) = (w[0] - pose.position[0], w[1] - pose.position[1]);
    let rho = (u * u + v * v).sqrt();
    let theta = pose.kappa.atan();
    let (st, ct) = theta.sin_cos();
    let fwd = u * ct + v * st;
    if !(fwd > T::zero()) || !(pose.focal > T::zero()) {
        return None;
    }
    let side = v * ct - u * st;
    Some((
        side / fwd / pose.focal,
        (w[2] - pose.position[2]) / rho / pose.focal,
    ))
}

fn gravity_bearing<T: Scalar>(pose: &PoseHypothesis<T>, c: &Correspondence<T>) -> [T; 3] {
    let az = pose.kappa.atan() + (c.xi * pose.focal).atan();
    let el = (c.eta * pose.focal).atan();
    let (sa, ca) = az.sin_cos();
    let (se, ce) = el.sin_cos();
    [ca * ce, sa * ce, se]
}

pub fn gravity_angular_error<T: Scalar>(
    pose: &PoseHypothesis<T>,
    c: &Correspondence<T>,
) -> Result<T, DomainError> {
    let d = [
        c.w[0] - pose.position[0],
        c.w[1] - pose.position[1],
        c.w[2] - pose.position[2],
    ];
    angle_between(&gravity_bearing(pose, c), &d)
}

/// Radial cameras only fix the direction of the image point about the
/// principal point; the error is the planar angle between `(ξ, η)` and the
/// projected direction of `w`.
pub fn radial_angular_error<T: Scalar>(
    pose: &PoseHypothesis<T>,
    c: &Correspondence<T>,
) -> Result<T, DomainError> {
    let r = pose.rotation();
    let a = [
        dot::<T, T>(&r[0], &c.w) + pose.position[0],
        dot::<T, T>(&r[1], &c.w) + pose.position[1],
        T::zero(),
    ];
    angle_between(&[c.xi, c.eta, T::zero()], &a)
}

/// Image coordinates under the radial model, with unit focal and depth
/// `r3 w + t3` supplied separately.
pub fn project_radial<T: Scalar>(pose: &PoseHypothesis<T>, w: &[T; 3]) -> (T, T) {
    let r = pose.rotation();
    (
        dot::<T, T>(&r[0], w) + pose.position[0],
        dot::<T, T>(&r[1], w) + pose.position[1],
    )
}

/// Angular error appropriate to the family `tag`.
pub fn angular_error<T: Scalar>(
    tag: ModelTag,
    pose: &PoseHypothesis<T>,
    c: &Correspondence<T>,
) -> Result<T> {
    Ok(match tag {
        ModelTag::Pose5 => gravity_angular_error(pose, c)?,
        ModelTag::Pose6 | ModelTag::Pose7 => reprojection_angular_error(pose, c)?,
        ModelTag::Radial5 => radial_angular_error(pose, c)?,
        other => return Err(Error::InvalidParameter(format!("{other} is not a pose model"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::pose::{pose5_surface_eval, pose7_surface_eval, radial5_surface_eval};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn perfect_and_antipodal() {
        let pose = PoseHypothesis::projective([0.1, -0.2, 0.3], [0.5, 0.2, 4.0], 1.2);
        let w = [0.3, -0.4, 1.0];
        let (xi, eta) = project(&pose, &w).unwrap();
        let c = Correspondence::new(w, xi, eta);
        assert_abs_diff_eq!(reprojection_angular_error(&pose, &c).unwrap(), 0.0, epsilon = 1e-7);

        let pose = PoseHypothesis::projective([0.0; 3], [0.0; 3], 1.0);
        let c = Correspondence::new([0.2, 0.1, -1.0], -0.2, -0.1);
        assert_abs_diff_eq!(reprojection_angular_error(&pose, &c).unwrap(), PI, epsilon = 1e-7);
    }

    #[test]
    fn camera_at_world_point_is_an_error() {
        let pose = PoseHypothesis::projective([0.0; 3], [0.0, 0.0, -1.0], 1.0);
        let c = Correspondence::new([0.0, 0.0, 1.0], 0.0, 0.0);
        assert!(reprojection_angular_error(&pose, &c).is_err());
    }

    #[test]
    fn projective_round_trip() {
        let (phi, t, f) = ([0.2, -0.1, 0.05], [0.7, -0.3, 5.0], 0.9);
        let pose = PoseHypothesis::projective(phi, t, f);
        let w = [1.0, 2.0, -0.5];
        let (xi, eta) = project(&pose, &w).unwrap();
        let (x, y) = pose7_surface_eval(&Correspondence::new(w, xi, eta), f, phi, t[2]).unwrap();
        assert_abs_diff_eq!(x, t[0], epsilon = 1e-9);
        assert_abs_diff_eq!(y, t[1], epsilon = 1e-9);
    }

    #[test]
    fn gravity_round_trip() {
        let pose = PoseHypothesis::gravity([1.0, -2.0, 1.5], 0.4, 0.8);
        let w = [10.0, 3.0, 4.0];
        let (xi, eta) = project_gravity(&pose, &w).unwrap();
        let c = Correspondence::new(w, xi, eta);
        let (k, z) = pose5_surface_eval(&c, 1.0, -2.0, 0.8, 1e-9).unwrap();
        assert_abs_diff_eq!(k, 0.4, epsilon = 1e-9);
        assert_abs_diff_eq!(z, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(gravity_angular_error(&pose, &c).unwrap(), 0.0, epsilon = 1e-7);
        let behind = [-10.0, -5.0, 1.0];
        assert!(project_gravity(&pose, &behind).is_none());
    }

    #[test]
    fn radial_round_trip() {
        let pose = PoseHypothesis::projective([0.3, 0.1, -0.2], [0.4, -0.6, 0.0], 1.0);
        let w = [1.0, 0.5, 2.0];
        let (xi, eta) = project_radial(&pose, &w);
        let c = Correspondence::new(w, 2.0 * xi, 2.0 * eta);
        let x = radial5_surface_eval(&c, -pose.position[0], pose.phi, 1e-9).unwrap();
        assert_abs_diff_eq!(x, pose.position[1], epsilon = 1e-9);
        assert_abs_diff_eq!(radial_angular_error(&pose, &c).unwrap(), 0.0, epsilon = 1e-7);
    }

    #[test]
    fn point_conversion_round_trip() {
        let pose = PoseHypothesis::projective([0.1, 0.2, 0.3], [1.0, 2.0, 3.0], 0.7);
        let p = pose.to_point(ModelTag::Pose7).unwrap();
        assert_eq!(PoseHypothesis::from_point(ModelTag::Pose7, &p).unwrap(), pose);
        assert!(PoseHypothesis::<f64>::from_point(ModelTag::Line2, &[0.0, 0.0]).is_err());
    }
}
