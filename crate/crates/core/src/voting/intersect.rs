//! Surface-box intersection predicates.

use smallvec::SmallVec;

use crate::geometry::{AaBox, Coords};
use crate::interval::Interval;
use crate::scalar::Scalar;
use crate::surface::{Family, Model, ModelTag, ParametricSurface, Prepared};

/// A box prepared for testing many surfaces of one model: the interval frame
/// of its free projection and the slack-expanded dependent ranges. Families
/// with a derivative enclosure also get a mean-value test, which is much
/// tighter than plain interval evaluation on small boxes.
pub struct BoxContext<T: Scalar, F: Family<T>> {
    prepared: Prepared<T, Interval<T>, F>,
    targets: Coords<Interval<T>>,
    centered: Option<Centered<T, F>>,
}

struct Centered<T: Scalar, F: Family<T>> {
    center: Prepared<T, T, F>,
    deriv: F::Deriv,
    // Physical offsets of the box from its center, per free axis.
    offsets: Coords<Interval<T>>,
    // 1 / scale of each dependent axis.
    inv_scale: Coords<T>,
}

impl<T: Scalar, F: Family<T>> BoxContext<T, F> {
    /// `slack[j]` widens the range of the `j`-th dependent axis on both sides.
    pub fn new(model: &Model<T, F>, bx: &AaBox<T>, slack: &[T]) -> Self {
        let targets = model
            .dep_axes()
            .iter()
            .zip(slack)
            .map(|(&a, &s)| bx.axis(a).inflate(s))
            .collect();
        let prepared = model.prepare_box(bx);
        let centered = model.family.deriv_frame(prepared.free_coords()).map(|deriv| {
            let center = model.prepare_point(&bx.center());
            let offsets = prepared
                .free_coords()
                .iter()
                .zip(center.free_coords())
                .map(|(&x, &c)| x - Interval::point(c))
                .collect();
            let inv_scale = model
                .dep_axes()
                .iter()
                .map(|&a| T::one() / model.map.scale(a))
                .collect();
            Centered {
                center,
                deriv,
                offsets,
                inv_scale,
            }
        });
        Self {
            prepared,
            targets,
            centered,
        }
    }

    /// Conservative test: `false` only when an enclosure of the dependent
    /// coordinates misses the expanded box. Domain errors count as
    /// intersecting.
    pub fn intersects(&self, model: &Model<T, F>, s: &ParametricSurface<T>) -> bool {
        let mut out: SmallVec<[Interval<T>; 4]> =
            SmallVec::from_elem(Interval::point(T::zero()), self.targets.len());
        if model.eval_prepared(&self.prepared, s, &mut out).is_err() {
            return true;
        }
        let hit = out
            .iter()
            .zip(&self.targets)
            .all(|(v, t)| v.lo.is_nan() || v.hi.is_nan() || v.overlaps(t));
        match &self.centered {
            Some(c) if hit => self.centered_hit(model, c, s),
            _ => hit,
        }
    }

    fn centered_hit(&self, model: &Model<T, F>, c: &Centered<T, F>, s: &ParametricSurface<T>) -> bool {
        let (m, k) = (self.targets.len(), c.offsets.len());
        let mut mid: SmallVec<[T; 4]> = SmallVec::from_elem(T::zero(), m);
        if model.eval_prepared(&c.center, s, &mut mid).is_err() {
            return true;
        }
        let t: SmallVec<[Interval<T>; 5]> = s.essentials.iter().map(|&v| Interval::point(v)).collect();
        let mut jac: SmallVec<[Interval<T>; 16]> = SmallVec::from_elem(Interval::point(T::zero()), m * k);
        let frame = self.prepared.frame();
        if model
            .family
            .free_jacobian(&c.deriv, frame, self.prepared.free_coords(), &t, &mut jac)
            .is_err()
        {
            return true;
        }
        (0..m).all(|j| {
            let mut v = Interval::point(mid[j]);
            for i in 0..k {
                v = v + jac[j * k + i] * c.offsets[i] * Interval::point(c.inv_scale[j]);
            }
            v.lo.is_nan() || v.hi.is_nan() || v.overlaps(&self.targets[j])
        })
    }
}

/// Whether `s` may meet `bx` expanded by `slack` on its dependent axes.
pub fn intersects_box<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    s: &ParametricSurface<T>,
    bx: &AaBox<T>,
    slack: &[T],
) -> bool {
    BoxContext::new(model, bx, slack).intersects(model, s)
}

/// Exact predicate for the affine families in low dimension: line and plane
/// duals with `d <= 3` through the edge recursion, and rays by clipping.
/// Returns `None` for other families.
pub fn intersects_box_exact<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    s: &ParametricSurface<T>,
    bx: &AaBox<T>,
    slack: &[T],
) -> Option<bool> {
    let d = model.dims().d;
    let mut grown = bx.clone();
    for (&a, &sl) in model.dep_axes().iter().zip(slack) {
        grown.min[a] = grown.min[a] - sl;
        grown.max[a] = grown.max[a] + sl;
    }
    match F::TAG {
        ModelTag::Line2 | ModelTag::Hyperplane if d <= 3 => Some(affine_hits_box(model, s, &grown)),
        ModelTag::Ray3 => Some(segment_hits_box(model, s, bx, &grown)),
        _ => None,
    }
}

// g(p) = p_dep - F(p_free). An affine hyperplane meets a box iff it meets one
// of its edges, which reduces to a sign test at the edge endpoints.
fn affine_hits_box<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    s: &ParametricSurface<T>,
    bx: &AaBox<T>,
) -> bool {
    let d = bx.dim();
    let dep = model.dep_axes()[0];
    let g = |corner: usize| -> T {
        let p: Coords<T> = (0..d)
            .map(|i| if corner & (1 << i) != 0 { bx.max[i] } else { bx.min[i] })
            .collect();
        let v = model.eval_at(&p, s).map(|o| o[0]).unwrap_or(T::nan());
        p[dep] - v
    };
    let values: Vec<T> = (0..1usize << d).map(g).collect();
    for corner in 0..1usize << d {
        for axis in 0..d {
            if corner & (1 << axis) != 0 {
                continue;
            }
            let (a, b) = (values[corner], values[corner | (1 << axis)]);
            if a.is_nan() || b.is_nan() {
                return true;
            }
            let tol = T::GRID_TOL;
            if (a <= tol && b >= -tol) || (a >= -tol && b <= tol) {
                return true;
            }
        }
    }
    false
}

// Clips the free parameter range of the ray against both dependent slabs.
fn segment_hits_box<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    s: &ParametricSurface<T>,
    bx: &AaBox<T>,
    grown: &AaBox<T>,
) -> bool {
    let free = model.free_axes()[0];
    let (x0, x1) = (bx.min[free], bx.max[free]);
    let at = |x: T| -> Option<Coords<T>> {
        let mut p: Coords<T> = bx.min.clone();
        p[free] = x;
        model.eval_at(&p, s).ok()
    };
    let (Some(v0), Some(v1)) = (at(x0), at(x1)) else {
        return true;
    };
    let tol = T::GRID_TOL;
    let (mut lo, mut hi) = (T::zero(), T::one());
    for (j, &a) in model.dep_axes().iter().enumerate() {
        let (p, q) = (v0[j], v1[j] - v0[j]);
        let (amin, amax) = (grown.min[a] - tol, grown.max[a] + tol);
        if q.abs() <= T::epsilon() {
            if p < amin || p > amax {
                return false;
            }
            continue;
        }
        let (ta, tb) = ((amin - p) / q, (amax - p) / q);
        lo = lo.max(ta.min(tb));
        hi = hi.min(ta.max(tb));
    }
    lo <= hi
}
