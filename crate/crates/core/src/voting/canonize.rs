//! Canonization: snapping the surfaces that meet a box onto a grid of
//! parameter values, so that near-identical surfaces merge.
//!
//! Essential parameter `t_i` is rounded with a step chosen so that the change
//! of every dependent coordinate, after re-fitting the free parameters at
//! the box center, stays below `ε'_j l / (2 (l + 1))` over the box. The step
//! comes from the width `Λ_ij` of the interval enclosure of `∂F_j/∂t_i` over
//! the box and the rounding neighbourhood: the mean value theorem bounds the
//! residual by `Σ_i Λ_ij |Δt_i|`. Free parameters then go to a grid of pitch
//! `ε'_j / (l + 1)` anchored at the box minimum. The total change, over the
//! box, is at most `ε'_j / 2`.
//!
//! Steps are rounded down to powers of two so that surfaces with similar
//! Jacobians land on a common grid.

use std::sync::Arc;

use indexmap::IndexMap;
use smallvec::SmallVec;

use crate::error::Result;
use crate::geometry::{AaBox, Coords};
use crate::interval::Interval;
use crate::scalar::Scalar;
use crate::surface::{Family, Model, ParametricSurface, Prepared};
use crate::voting::{OperationCounts, Tolerance};

/// Nearest integral multiple of `step`; exact halves go toward `+∞`.
pub fn round_to_step<T: Scalar>(value: T, step: T) -> T {
    round_index(value, step) * step
}

#[inline]
fn round_index<T: Scalar>(value: T, step: T) -> T {
    let q = value / step;
    (q + T::lit(0.5) + T::GRID_TOL * q.abs().max(T::one())).floor()
}

/// Side information of one canonization pass.
#[derive(Debug, Clone, Default)]
pub struct CanonizeReport<T> {
    /// `assignment[i]` is the output surface that absorbed input `i`.
    pub assignment: Vec<usize>,
    /// Proven bound on the per-coordinate change over the box, per
    /// dependent axis.
    pub drift: Coords<T>,
    pub ops: OperationCounts,
}

/// Canonizes `surfaces` for `bx`. Merged surfaces carry the union of their
/// members' ids; output order follows first occurrence.
pub fn canonize<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    surfaces: &[ParametricSurface<T>],
    bx: &AaBox<T>,
    tol: &Tolerance<T>,
) -> Result<Vec<ParametricSurface<T>>> {
    canonize_with_report(model, surfaces, bx, tol).map(|(s, _)| s)
}

type Key = SmallVec<[i64; 16]>;

const EXACT: i64 = i64::MIN;

#[derive(Clone, Copy)]
enum Step<T> {
    Exact,
    Grid(T),
}

struct Ctx<'a, T: Scalar, F: Family<T>> {
    model: &'a Model<T, F>,
    boxp: Prepared<T, Interval<T>, F>,
    centerp: Prepared<T, T, F>,
    eps_prime: Coords<T>,
    anchors: Coords<T>,
    lp1: T,
    l: usize,
    m: usize,
}

impl<T: Scalar, F: Family<T>> Ctx<'_, T, F> {
    // Per-parameter steps from a Jacobian enclosure over the box and `t`.
    fn steps(&self, t: &[Interval<T>], ops: &mut OperationCounts) -> SmallVec<[Step<T>; 5]> {
        let (l, m) = (self.l, self.m);
        let mut jac: SmallVec<[Interval<T>; 16]> =
            SmallVec::from_elem(Interval::point(T::zero()), l * m);
        ops.surface_evaluations += 1;
        if self.model.jacobian_prepared(&self.boxp, t, &mut jac).is_err() {
            return SmallVec::from_elem(Step::Exact, l);
        }
        (0..l)
            .map(|i| {
                let mut step = T::infinity();
                for j in 0..m {
                    let w = jac[j * l + i].width();
                    if !w.is_finite() || w.is_nan() {
                        return Step::Exact;
                    }
                    if w > T::zero() {
                        step = step.min(self.eps_prime[j] / (self.lp1 * w));
                    }
                }
                if step.is_finite() && step > T::zero() {
                    Step::Grid(step)
                } else {
                    Step::Exact
                }
            })
            .collect()
    }

    fn canonical(
        &self,
        s: &ParametricSurface<T>,
        ops: &mut OperationCounts,
    ) -> (Key, SmallVec<[T; 5]>, SmallVec<[T; 2]>) {
        let (l, m) = (self.l, self.m);
        let t_pt: SmallVec<[Interval<T>; 5]> = s.essentials.iter().map(|&v| Interval::point(v)).collect();
        let mut steps = self.steps(&t_pt, ops);
        if steps.iter().any(|st| matches!(st, Step::Grid(_))) {
            let hull: SmallVec<[Interval<T>; 5]> = s
                .essentials
                .iter()
                .zip(&steps)
                .map(|(&v, st)| match st {
                    Step::Grid(h) => Interval::new(v - *h * T::lit(0.5), v + *h * T::lit(0.5)),
                    Step::Exact => Interval::point(v),
                })
                .collect();
            let wide = self.steps(&hull, ops);
            for (a, b) in steps.iter_mut().zip(&wide) {
                *a = match (*a, *b) {
                    (Step::Grid(x), Step::Grid(y)) => Step::Grid(x.min(y)),
                    _ => Step::Exact,
                };
            }
        }

        let mut key = Key::new();
        let mut rounded: SmallVec<[T; 5]> = SmallVec::with_capacity(l);
        for (&v, st) in s.essentials.iter().zip(&steps) {
            match st {
                Step::Grid(h) => {
                    let e = h.log2().floor();
                    let pitch = T::lit(2.0).powf(e);
                    let idx = round_index(v, pitch);
                    key.push(e.to_i64().unwrap_or(EXACT));
                    key.push(idx.to_i64().unwrap_or(EXACT));
                    rounded.push(idx * pitch);
                }
                Step::Exact => {
                    key.push(EXACT);
                    key.push(bits(v));
                    rounded.push(v);
                }
            }
        }

        let mut at_t: SmallVec<[T; 4]> = SmallVec::from_elem(T::zero(), m);
        let mut at_s: SmallVec<[T; 4]> = SmallVec::from_elem(T::zero(), m);
        ops.surface_evaluations += 2;
        let ok = self.model.eval_with(&self.centerp, &s.essentials, &s.free, &mut at_t).is_ok()
            && self.model.eval_with(&self.centerp, &rounded, &s.free, &mut at_s).is_ok()
            && at_t.iter().chain(&at_s).all(|v| v.is_finite());
        if !ok {
            let mut key = Key::new();
            key.push(EXACT);
            key.extend(s.essentials.iter().chain(&s.free).map(|&v| bits(v)));
            return (key, s.essentials.clone(), s.free.clone());
        }

        let mut free: SmallVec<[T; 2]> = SmallVec::with_capacity(m);
        for j in 0..m {
            let g = s.free[j] + at_t[j] - at_s[j];
            let anchor = self.anchors[j];
            let pitch = self.eps_prime[j] / self.lp1;
            let idx = round_index(g - anchor, pitch);
            key.push(idx.to_i64().unwrap_or(EXACT));
            free.push(anchor + idx * pitch);
        }
        (key, rounded, free)
    }
}

fn bits<T: Scalar>(v: T) -> i64 {
    v.to_f64_lossy().to_bits() as i64
}

fn context<'a, T: Scalar, F: Family<T>>(
    model: &'a Model<T, F>,
    bx: &AaBox<T>,
    tol: &Tolerance<T>,
) -> Ctx<'a, T, F> {
    let dims = model.dims();
    Ctx {
        model,
        boxp: model.prepare_box(bx),
        centerp: model.prepare_point(&bx.center()),
        eps_prime: model.dep_axes().iter().map(|&a| tol.eps_prime(a)).collect(),
        anchors: model.dep_axes().iter().map(|&a| bx.min[a]).collect(),
        lp1: T::from_usize_lossy(dims.l + 1),
        l: dims.l,
        m: dims.free_params(),
    }
}

/// [`canonize`] plus the input-to-output assignment and the drift bound.
pub fn canonize_with_report<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    surfaces: &[ParametricSurface<T>],
    bx: &AaBox<T>,
    tol: &Tolerance<T>,
) -> Result<(Vec<ParametricSurface<T>>, CanonizeReport<T>)> {
    model.check_tags(surfaces)?;
    tol.check_dim(model.dims().d)?;
    let ctx = context(model, bx, tol);
    let mut ops = OperationCounts::default();

    let mut groups: IndexMap<Key, usize> = IndexMap::with_capacity(surfaces.len());
    let mut out: Vec<ParametricSurface<T>> = Vec::new();
    let mut members: Vec<SmallVec<[usize; 1]>> = Vec::new();
    let mut assignment = Vec::with_capacity(surfaces.len());
    for (i, s) in surfaces.iter().enumerate() {
        let (key, essentials, free) = ctx.canonical(s, &mut ops);
        let slot = *groups.entry(key).or_insert_with(|| {
            out.push(ParametricSurface {
                tag: s.tag,
                essentials,
                free,
                source_ids: s.source_ids.clone(),
            });
            members.push(SmallVec::new());
            out.len() - 1
        });
        members[slot].push(i);
        assignment.push(slot);
    }
    for (o, mem) in out.iter_mut().zip(&members) {
        if mem.len() > 1 {
            let ids: Vec<u32> = mem
                .iter()
                .flat_map(|&i| surfaces[i].source_ids.iter().copied())
                .collect();
            o.source_ids = Arc::from(ids);
        }
    }
    let drift = ctx.eps_prime.iter().map(|&e| e * T::lit(0.5)).collect();
    Ok((out, CanonizeReport { assignment, drift, ops }))
}

/// Upper bound on the number of distinct canonical surfaces produced for
/// `bx` by any input whose (physical) essential parameters lie in
/// `essential_ranges` and whose (normalized) free parameters lie in
/// `free_ranges`. Independent of the number of inputs. Only available when
/// the Jacobian enclosure does not depend on the essential parameters,
/// which holds for the affine families; otherwise `None`.
pub fn canonical_count_bound<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    bx: &AaBox<T>,
    tol: &Tolerance<T>,
    essential_ranges: &[(T, T)],
    free_ranges: &[(T, T)],
) -> Option<f64> {
    let ctx = context(model, bx, tol);
    let mut ops = OperationCounts::default();
    let hull: SmallVec<[Interval<T>; 5]> =
        essential_ranges.iter().map(|&(a, b)| Interval::new(a, b)).collect();
    let mid: SmallVec<[Interval<T>; 5]> = hull.iter().map(|r| Interval::point(r.mid())).collect();
    let wide = ctx.steps(&hull, &mut ops);
    let at_mid = ctx.steps(&mid, &mut ops);
    let mut bound = 1.0f64;
    let mut pitches: SmallVec<[T; 5]> = SmallVec::new();
    for ((a, b), r) in wide.iter().zip(&at_mid).zip(&hull) {
        let (Step::Grid(a), Step::Grid(b)) = (a, b) else {
            return None;
        };
        let (ea, eb) = (a.log2().floor(), b.log2().floor());
        if ea != eb {
            return None;
        }
        let pitch = T::lit(2.0).powf(ea);
        pitches.push(pitch);
        bound *= (r.width() / pitch).to_f64_lossy().floor() + 2.0;
    }
    // Re-fitting moves a free parameter by at most Σ_i |∂F_j/∂t_i| pitch_i / 2.
    let l = ctx.l;
    let mut jac: SmallVec<[Interval<T>; 16]> =
        SmallVec::from_elem(Interval::point(T::zero()), l * ctx.m);
    let center = bx.center();
    let free_center: Coords<Interval<T>> =
        model.free_axes().iter().map(|&a| Interval::point(center[a])).collect();
    model
        .jacobian_prepared(&model.prepare(&free_center), &hull, &mut jac)
        .ok()?;
    for (j, &(lo, hi)) in free_ranges.iter().enumerate() {
        let shift = (0..l).fold(T::zero(), |acc, i| acc + jac[j * l + i].mag() * pitches[i] * T::lit(0.5));
        let pitch = ctx.eps_prime[j] / ctx.lp1;
        bound *= ((hi - lo + shift * T::lit(2.0)) / pitch).to_f64_lossy().floor() + 2.0;
    }
    Some(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SpaceMap;
    use crate::surfaces::line::Line2;
    use proptest::prelude::*;

    #[test]
    fn rounding_examples() {
        assert_eq!(round_to_step(0.37, 0.1), 0.4);
        assert_eq!(round_to_step(0.35, 0.1), 0.4);
        assert_eq!(round_to_step(-0.02, 0.05), 0.0);
        assert_eq!(round_to_step(-0.25, 0.5), 0.0);
    }

    fn model() -> Model<f64, Line2> {
        Model::new(Line2, SpaceMap::identity(2)).unwrap()
    }

    #[test]
    fn identical_surfaces_merge() {
        let m = model();
        let s = vec![m.surface(&[0.5], &[0.2], 0), m.surface(&[0.5], &[0.2], 1)];
        let out = canonize(&m, &s, &AaBox::unit(2), &Tolerance::uniform(2, 0.05).unwrap()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(&out[0].source_ids[..], &[0, 1]);
    }

    #[test]
    fn close_slopes_merge() {
        // unit box: Λ = 1, ℓ = 1, so the slope pitch is the largest power of
        // two below ε'/2.
        let m = model();
        let tol = Tolerance::<f64>::new(vec![0.2, 0.2], 1.0).unwrap();
        let pitch = 2f64.powf((tol.eps_prime(1) / 2.0).log2().floor());
        assert_eq!(pitch, 0.03125);
        let s = vec![m.surface(&[0.501], &[0.2], 0), m.surface(&[0.499], &[0.2], 1)];
        let out = canonize(&m, &s, &AaBox::unit(2), &tol).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].essentials[0], 0.5);
    }

    #[test]
    fn single_surface_keeps_ids() {
        let m = model();
        let s = vec![m.surface(&[0.3], &[0.1], 42)];
        let out = canonize(&m, &s, &AaBox::unit(2), &Tolerance::uniform(2, 0.1).unwrap()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(&out[0].source_ids[..], &[42]);
    }

    #[test]
    fn mixed_tags_are_rejected() {
        let m = model();
        let mut s = m.surface(&[0.3], &[0.1], 0);
        s.tag = crate::surface::ModelTag::Ray3;
        assert!(canonize(&m, &[s], &AaBox::unit(2), &Tolerance::uniform(2, 0.1).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn rounding_is_nearest(v in -100.0f64..100.0, step in 0.001f64..10.0) {
            let r = round_to_step(v, step);
            prop_assert!((r - v).abs() <= step * 0.5 * (1.0 + 1e-9));
        }

        #[test]
        fn line_deviation_within_eps_prime(
            params in proptest::collection::vec((-1.0f64..0.0, 0.0f64..1.0), 1..40),
            lo in proptest::array::uniform2(0.0f64..0.75), w in 0.01f64..0.25, eps in 0.005f64..0.2,
        ) {
            let m = model();
            let tol = Tolerance::uniform(2, eps).unwrap();
            let bx = AaBox::new(&lo, &[lo[0] + w, lo[1] + w]).unwrap();
            let surfaces: Vec<_> = params.iter().enumerate().map(|(i, &(t, f))| m.surface(&[t], &[f], i as u32)).collect();
            let (out, rep) = canonize_with_report(&m, &surfaces, &bx, &tol).unwrap();
            for (s, &k) in surfaces.iter().zip(&rep.assignment) {
                for q in 0..=50 {
                    let x = bx.min[0] + bx.side(0) * q as f64 / 50.0;
                    let a = m.eval_at(&[x, 0.0], s).unwrap()[0];
                    let b = m.eval_at(&[x, 0.0], &out[k]).unwrap()[0];
                    prop_assert!((a - b).abs() <= rep.drift[0] + 1e-12);
                }
            }
        }
    }
}
