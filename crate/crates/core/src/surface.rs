//! Parametric surfaces `x_j = F_j(x; t) + f_j` and the model abstraction
//! that maps physical surface equations into the normalized voting cube.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{DomainError, Error, Result};
use crate::geometry::{AaBox, Coords};
use crate::interval::Interval;
use crate::scalar::{Real, Scalar};

/// Surface family identifier. The string forms are part of the file format
/// and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelTag {
    #[serde(rename = "line2")]
    Line2,
    #[serde(rename = "hyperplane")]
    Hyperplane,
    #[serde(rename = "pose5")]
    Pose5,
    #[serde(rename = "pose6")]
    Pose6,
    #[serde(rename = "pose7")]
    Pose7,
    #[serde(rename = "radial5")]
    Radial5,
    #[serde(rename = "ray3")]
    Ray3,
    #[serde(rename = "sim2")]
    Sim2,
}

impl ModelTag {
    pub const ALL: [ModelTag; 8] = [
        ModelTag::Line2,
        ModelTag::Hyperplane,
        ModelTag::Pose5,
        ModelTag::Pose6,
        ModelTag::Pose7,
        ModelTag::Radial5,
        ModelTag::Ray3,
        ModelTag::Sim2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelTag::Line2 => "line2",
            ModelTag::Hyperplane => "hyperplane",
            ModelTag::Pose5 => "pose5",
            ModelTag::Pose6 => "pose6",
            ModelTag::Pose7 => "pose7",
            ModelTag::Radial5 => "radial5",
            ModelTag::Ray3 => "ray3",
            ModelTag::Sim2 => "sim2",
        }
    }

    /// `(d, k, l)` for the family; `ambient` is only consulted for hyperplanes.
    pub fn expected_dims(self, ambient: usize) -> Dims {
        let (d, k, l) = match self {
            ModelTag::Line2 => (2, 1, 1),
            ModelTag::Hyperplane => (ambient, ambient.saturating_sub(1), ambient.saturating_sub(1)),
            ModelTag::Pose5 => (5, 3, 4),
            ModelTag::Pose6 => (6, 4, 5),
            ModelTag::Pose7 => (7, 5, 5),
            ModelTag::Radial5 => (5, 4, 5),
            ModelTag::Ray3 => (3, 1, 2),
            ModelTag::Sim2 => (4, 2, 2),
        };
        Dims { d, k, l }
    }

    pub fn is_pose(self) -> bool {
        matches!(
            self,
            ModelTag::Pose5 | ModelTag::Pose6 | ModelTag::Pose7 | ModelTag::Radial5
        )
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelTag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Ambient dimension `d`, surface dimension `k`, essential-parameter count `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub d: usize,
    pub k: usize,
    pub l: usize,
}

impl Dims {
    #[inline]
    pub fn free_params(&self) -> usize {
        self.d - self.k
    }
}

/// One surface of a family. Free parameters are stored in normalized voting
/// units; essential parameters stay physical.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricSurface<T> {
    pub tag: ModelTag,
    pub essentials: SmallVec<[T; 5]>,
    pub free: SmallVec<[T; 2]>,
    pub source_ids: Arc<[u32]>,
}

impl<T: Scalar> ParametricSurface<T> {
    #[inline]
    pub fn multiplicity(&self) -> usize {
        self.source_ids.len()
    }
}

/// Affine map from physical coordinates to the unit cube, per voting axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceMap<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Scalar> SpaceMap<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Dimension {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "space map axis {i}: [{a}, {b}] is empty"
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            lo: vec![T::zero(); d],
            hi: vec![T::one(); d],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    #[inline]
    pub fn scale(&self, axis: usize) -> T {
        self.hi[axis] - self.lo[axis]
    }

    #[inline]
    pub fn to_unit(&self, axis: usize, v: T) -> T {
        (v - self.lo[axis]) / self.scale(axis)
    }

    #[inline]
    pub fn from_unit(&self, axis: usize, u: T) -> T {
        self.lo[axis] + u * self.scale(axis)
    }

    pub fn point_to_unit(&self, p: &[T]) -> Vec<T> {
        p.iter().enumerate().map(|(i, &v)| self.to_unit(i, v)).collect()
    }

    pub fn point_from_unit(&self, u: &[T]) -> Vec<T> {
        u.iter().enumerate().map(|(i, &v)| self.from_unit(i, v)).collect()
    }
}

/// Physical surface equations of one family.
///
/// `x` holds the free coordinates in `free_axes` order and physical units;
/// `eval` writes `F_j(x; t)` for each dependent axis, without the additive
/// free parameter. `jacobian` writes `dF_j/dt_i` at `out[j * l + i]`.
pub trait Family<T: Scalar>: Clone + Send + Sync + 'static {
    const TAG: ModelTag;

    /// Per-box or per-point precomputation shared by all surfaces.
    type Frame<R: Real<T>>: Send + Sync;

    fn dims(&self) -> Dims;
    fn free_axes(&self) -> &[usize];
    fn dep_axes(&self) -> &[usize];
    fn axis_names(&self) -> Vec<String>;

    fn frame<R: Real<T>>(&self, x: &[R]) -> Self::Frame<R>;

    fn eval<R: Real<T>>(
        &self,
        frame: &Self::Frame<R>,
        x: &[R],
        t: &[R],
        out: &mut [R],
    ) -> Result<(), DomainError>;

    fn jacobian<R: Real<T>>(
        &self,
        frame: &Self::Frame<R>,
        x: &[R],
        t: &[R],
        out: &mut [R],
    ) -> Result<(), DomainError>;

    /// Box-level data for [`Family::free_jacobian`].
    type Deriv: Send + Sync;

    /// Precomputes derivative data over a free box, or `None` when the
    /// family has no derivative enclosure there.
    fn deriv_frame(&self, _x: &[Interval<T>]) -> Option<Self::Deriv> {
        None
    }

    /// Encloses `dF_j/dx_i` over the free box at `out[j * k + i]`, in
    /// physical units.
    fn free_jacobian(
        &self,
        _deriv: &Self::Deriv,
        _frame: &Self::Frame<Interval<T>>,
        _x: &[Interval<T>],
        _t: &[Interval<T>],
        _out: &mut [Interval<T>],
    ) -> Result<(), DomainError> {
        Err(DomainError("no free-coordinate derivative"))
    }
}

/// Free coordinates of a point or box, prepared for repeated evaluation.
pub struct Prepared<T: Scalar, R: Real<T>, F: Family<T>> {
    x: Coords<R>,
    frame: F::Frame<R>,
}

impl<T: Scalar, R: Real<T>, F: Family<T>> Prepared<T, R, F> {
    /// Free coordinates in physical units.
    pub fn free_coords(&self) -> &[R] {
        &self.x
    }

    pub fn frame(&self) -> &F::Frame<R> {
        &self.frame
    }
}

/// A surface family bound to a space map: everything the voting machinery
/// sees is in normalized `[0,1]^d` coordinates.
#[derive(Debug, Clone)]
pub struct Model<T, F> {
    pub family: F,
    pub map: SpaceMap<T>,
}

impl<T: Scalar, F: Family<T>> Model<T, F> {
    /// Binds `family` to `map`, checking the family's dimension bookkeeping.
    pub fn new(family: F, map: SpaceMap<T>) -> Result<Self> {
        let dims = family.dims();
        let expected = F::TAG.expected_dims(dims.d);
        if dims != expected {
            return Err(Error::InvalidParameter(format!(
                "{} declares {:?}, expected {:?}",
                F::TAG,
                dims,
                expected
            )));
        }
        if family.free_axes().len() != dims.k || family.dep_axes().len() != dims.d - dims.k {
            return Err(Error::InvalidParameter(format!(
                "{}: axis layout does not match k={}",
                F::TAG,
                dims.k
            )));
        }
        let mut seen = vec![false; dims.d];
        for &a in family.free_axes().iter().chain(family.dep_axes()) {
            if a >= dims.d || seen[a] {
                return Err(Error::InvalidParameter(format!(
                    "{}: axis layout is not a permutation",
                    F::TAG
                )));
            }
            seen[a] = true;
        }
        if map.dim() != dims.d {
            return Err(Error::Dimension {
                expected: dims.d,
                got: map.dim(),
            });
        }
        Ok(Self { family, map })
    }

    #[inline]
    pub fn tag(&self) -> ModelTag {
        F::TAG
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.family.dims()
    }

    #[inline]
    pub fn free_axes(&self) -> &[usize] {
        self.family.free_axes()
    }

    pub fn axis_names(&self) -> Vec<String> {
        self.family.axis_names()
    }

    #[inline]
    pub fn dep_axes(&self) -> &[usize] {
        self.family.dep_axes()
    }

    /// Builds a surface from physical essential and free parameters.
    pub fn surface(&self, essentials: &[T], free_physical: &[T], id: u32) -> ParametricSurface<T> {
        debug_assert_eq!(essentials.len(), self.dims().l);
        debug_assert_eq!(free_physical.len(), self.dims().free_params());
        let free = free_physical
            .iter()
            .zip(self.dep_axes())
            .map(|(&f, &axis)| f / self.map.scale(axis))
            .collect();
        ParametricSurface {
            tag: F::TAG,
            essentials: essentials.iter().copied().collect(),
            free,
            source_ids: Arc::from(vec![id]),
        }
    }

    /// Physical value of the `j`-th free parameter of `s`.
    pub fn free_physical(&self, s: &ParametricSurface<T>, j: usize) -> T {
        s.free[j] * self.map.scale(self.dep_axes()[j])
    }

    pub fn prepare<R: Real<T>>(&self, x_free_unit: &[R]) -> Prepared<T, R, F> {
        let x: Coords<R> = x_free_unit
            .iter()
            .zip(self.free_axes())
            .map(|(&u, &axis)| {
                R::lift(self.map.lo[axis]) + u * R::lift(self.map.scale(axis))
            })
            .collect();
        let frame = self.family.frame(&x);
        Prepared { x, frame }
    }

    pub fn prepare_box(&self, bx: &AaBox<T>) -> Prepared<T, Interval<T>, F> {
        let free: Coords<Interval<T>> = self.free_axes().iter().map(|&a| bx.axis(a)).collect();
        self.prepare(&free)
    }

    pub fn prepare_point(&self, point: &[T]) -> Prepared<T, T, F> {
        let free: Coords<T> = self.free_axes().iter().map(|&a| point[a]).collect();
        self.prepare(&free)
    }

    /// Dependent coordinates of `s` in unit coordinates, free parameters included.
    pub fn eval_prepared<R: Real<T>>(
        &self,
        p: &Prepared<T, R, F>,
        s: &ParametricSurface<T>,
        out: &mut [R],
    ) -> Result<(), DomainError> {
        let t: SmallVec<[R; 5]> = s.essentials.iter().map(|&v| R::lift(v)).collect();
        self.eval_with(p, &t, &s.free, out)
    }

    /// Same as [`Self::eval_prepared`] with explicit essentials and free parameters.
    pub fn eval_with<R: Real<T>>(
        &self,
        p: &Prepared<T, R, F>,
        t: &[R],
        free: &[T],
        out: &mut [R],
    ) -> Result<(), DomainError> {
        self.family.eval(&p.frame, &p.x, t, out)?;
        for (j, &axis) in self.dep_axes().iter().enumerate() {
            let inv = T::one() / self.map.scale(axis);
            out[j] = (out[j] - R::lift(self.map.lo[axis])) * R::lift(inv) + R::lift(free[j]);
        }
        Ok(())
    }

    /// `d F_j / d t_i` in unit coordinates, at `out[j * l + i]`.
    pub fn jacobian_prepared<R: Real<T>>(
        &self,
        p: &Prepared<T, R, F>,
        t: &[R],
        out: &mut [R],
    ) -> Result<(), DomainError> {
        self.family.jacobian(&p.frame, &p.x, t, out)?;
        let l = self.dims().l;
        for (j, &axis) in self.dep_axes().iter().enumerate() {
            let inv = R::lift(T::one() / self.map.scale(axis));
            for v in &mut out[j * l..(j + 1) * l] {
                *v = *v * inv;
            }
        }
        Ok(())
    }

    /// Evaluates `s` at a full voting-space point, returning the dependent
    /// coordinates in unit coordinates.
    pub fn eval_at(&self, point: &[T], s: &ParametricSurface<T>) -> Result<Coords<T>, DomainError> {
        let p = self.prepare_point(point);
        let mut out: Coords<T> = std::iter::repeat(T::zero()).take(self.dims().free_params()).collect();
        self.eval_prepared(&p, s, &mut out)?;
        Ok(out)
    }

    /// Checks that all surfaces belong to this family.
    pub fn check_tags(&self, surfaces: &[ParametricSurface<T>]) -> Result<()> {
        for s in surfaces {
            if s.tag != F::TAG {
                return Err(Error::MixedModels(F::TAG, s.tag));
            }
        }
        Ok(())
    }
}
