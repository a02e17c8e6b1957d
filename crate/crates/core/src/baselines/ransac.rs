use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::solvers::{solve_hyperplane, solve_line, solve_pose5, solve_rays, solve_similarity};
use crate::datagen::{Items, ProblemInstance};
use crate::error::{Error, Result};
use crate::geometry::{AaBox, Coords};
use crate::scalar::Scalar;
use crate::surface::{Family, Model, ModelTag, ParametricSurface};
use crate::voting::{OperationCounts, Tolerance, VoteResult};
use crate::with_model;

/// Iteration cap used by [`ransac_iterations`].
pub const DEFAULT_MAX_ITERATIONS: u64 = 100_000_000;

const NEIGHBORHOOD: f64 = 1.5;

/// Smallest `N` with `1 - (1 - b^k)^N >= confidence`, capped at
/// [`DEFAULT_MAX_ITERATIONS`].
pub fn ransac_iterations(b: f64, k_min: usize, confidence: f64) -> Result<u64> {
    ransac_iterations_capped(b, k_min, confidence, DEFAULT_MAX_ITERATIONS)
}

pub fn ransac_iterations_capped(b: f64, k_min: usize, confidence: f64, cap: u64) -> Result<u64> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(Error::InvalidParameter(format!("inlier bound {b} outside (0, 1]")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence {confidence} outside (0, 1)")));
    }
    if k_min == 0 {
        return Err(Error::InvalidParameter("minimal set size must be positive".into()));
    }
    if b == 1.0 {
        return Ok(1);
    }
    let p = b.powi(k_min.min(i32::MAX as usize) as i32);
    let log_miss = (-p).ln_1p();
    if !(p > 0.0) || !(log_miss < 0.0) {
        log::warn!("b^k = {p:e} underflows; using the cap of {cap} iterations");
        return Ok(cap);
    }
    let target = (1.0 - confidence).ln();
    let guess = (target / log_miss).ceil();
    if !(guess < cap as f64) {
        log::warn!("{guess:e} iterations needed; capped at {cap}");
        return Ok(cap);
    }
    // Settle rounding at the boundary.
    let reached = |n: u64| n as f64 * log_miss <= target;
    let mut n = (guess as u64).max(1);
    while n > 1 && reached(n - 1) {
        n -= 1;
    }
    while !reached(n) {
        n += 1;
    }
    Ok(n)
}

/// Size of the minimal sample of the solver for `tag` in `d` dimensions.
pub fn minimal_set_size(tag: ModelTag, d: usize) -> Result<usize> {
    match tag {
        ModelTag::Line2 => Ok(2),
        ModelTag::Hyperplane => Ok(d),
        ModelTag::Ray3 | ModelTag::Sim2 => Ok(2),
        ModelTag::Pose5 => Ok(3),
        other => Err(Error::NoMinimalSolver(other)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacConfig<T> {
    /// Lower bound `b` on the inlier fraction, used for the iteration count.
    pub inlier_bound: f64,
    /// Sample size in the iteration count; `None` takes the solver's.
    pub minimal_set_size: Option<usize>,
    pub confidence: f64,
    /// An item is an inlier if its surface passes within `1.5ε` of the
    /// hypothesis, the same neighbourhood voting uses.
    pub eps: Tolerance<T>,
    pub max_iterations: u64,
    pub seed: u64,
    /// Focal length handed to the gravity-camera solver. Defaults to the
    /// planted focal, then to the nominal one.
    pub known_focal: Option<T>,
}

impl<T: Scalar> RansacConfig<T> {
    pub fn new(inlier_bound: f64, confidence: f64, eps: Tolerance<T>, seed: u64) -> Self {
        Self {
            inlier_bound,
            minimal_set_size: None,
            confidence,
            eps,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seed,
            known_focal: None,
        }
    }
}

#[derive(Clone)]
struct Best<T> {
    count: usize,
    iteration: u64,
    point: Vec<T>,
}

fn better<T>(a: Option<Best<T>>, b: Option<Best<T>>) -> Option<Best<T>> {
    match (a, b) {
        (Some(a), Some(b)) => {
            if (b.count, std::cmp::Reverse(b.iteration)) > (a.count, std::cmp::Reverse(a.iteration)) {
                Some(b)
            } else {
                Some(a)
            }
        }
        (a, None) => a,
        (None, b) => b,
    }
}

/// Items whose surfaces pass within the inlier slack of `point`.
fn inliers<'a, T: Scalar, F: Family<T>>(
    model: &'a Model<T, F>,
    surfaces: &'a [ParametricSurface<T>],
    point: &'a [T],
    slack: &'a [T],
) -> impl Iterator<Item = &'a ParametricSurface<T>> + 'a {
    let dep = model.dep_axes();
    let prep = model.prepare_point(point);
    let mut out: Coords<T> = slack.iter().map(|_| T::zero()).collect();
    surfaces.iter().filter(move |s| {
        model.eval_prepared(&prep, s, &mut out).is_ok()
            && out
                .iter()
                .zip(dep)
                .zip(slack)
                .all(|((&y, &axis), &tol)| (y - point[axis]).abs() <= tol)
    })
}

/// Minimal-solver dispatch on the instance's items; hypotheses are physical.
struct Hypotheses<'a, T: Scalar> {
    instance: &'a ProblemInstance<T>,
    focal: T,
    z_spread: T,
}

impl<T: Scalar> Hypotheses<'_, T> {
    fn solve(&self, idx: &[usize]) -> Option<Vec<T>> {
        match &self.instance.items {
            Items::Points(p) => {
                let pts: Vec<&[T]> = idx.iter().map(|&i| p[i].as_slice()).collect();
                match self.instance.model_tag {
                    ModelTag::Line2 => solve_line(pts[0], pts[1]),
                    _ => solve_hyperplane(&pts),
                }
            }
            Items::Rays(r) => solve_rays(&r[idx[0]], &r[idx[1]]),
            Items::Pairs(p) => solve_similarity(&p[idx[0]], &p[idx[1]]),
            Items::Correspondences(c) => {
                solve_pose5(&[&c[idx[0]], &c[idx[1]], &c[idx[2]]], self.focal, self.z_spread)
            }
        }
    }
}

/// Seeded RANSAC over the instance's minimal solver. Iteration `i` draws its
/// sample from stream `i` of the seed, so the result does not depend on the
/// thread count. Degenerate samples and hypotheses outside the voting box
/// count as solver calls but are not scored. Ties go to the earliest
/// iteration. The reported point is in normalized coordinates.
pub fn ransac_fit<T: Scalar>(
    instance: &ProblemInstance<T>,
    model_tag: ModelTag,
    cfg: &RansacConfig<T>,
) -> Result<VoteResult<T>> {
    if model_tag != instance.model_tag {
        return Err(Error::MixedModels(instance.model_tag, model_tag));
    }
    let d = instance.dim();
    let k = minimal_set_size(model_tag, d)?;
    cfg.eps.check_dim(d)?;
    let n = instance.len();
    if n < k {
        return Err(Error::TooFewItems { needed: k, got: n });
    }
    let iterations = ransac_iterations_capped(
        cfg.inlier_bound,
        cfg.minimal_set_size.unwrap_or(k),
        cfg.confidence,
        cfg.max_iterations,
    )?;
    let model = instance.model()?;
    let surfaces = instance.surfaces(&model)?;
    let map = &instance.space_map;
    let focal = cfg
        .known_focal
        .or_else(|| instance.ground_truth.as_ref().and_then(|g| g.params.get(4).copied()))
        .or(instance.f0)
        .unwrap_or_else(T::one);
    let hyp = Hypotheses {
        instance,
        focal,
        // Each point's height estimate may sit anywhere in the inlier slab.
        z_spread: if model_tag == ModelTag::Pose5 {
            T::lit(2.0 * NEIGHBORHOOD) * cfg.eps.eps[2] * map.scale(2)
        } else {
            T::infinity()
        },
    };
    let dep = model.dep_axes();
    let slack: Vec<T> = dep
        .iter()
        .map(|&a| cfg.eps.eps[a] * T::lit(NEIGHBORHOOD) + T::GRID_TOL)
        .collect();
    let unit = AaBox::unit(d);
    let inside = |p: &[T]| p.iter().all(|&v| v >= -T::GRID_TOL && v <= T::one() + T::GRID_TOL);

    let (best, ops) = (0..iterations)
        .into_par_iter()
        .fold(
            || (None::<Best<T>>, OperationCounts::default()),
            |(best, mut ops), i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i);
                let idx = index::sample(&mut rng, n, k).into_vec();
                ops.solver_calls += 1;
                let point = match hyp.solve(&idx).map(|p| map.point_to_unit(&p)) {
                    Some(p) if inside(&p) => p,
                    _ => return (best, ops),
                };
                ops.surface_evaluations += surfaces.len() as u64;
                let count = with_model!(&model, m => inliers(m, &surfaces, &point, &slack).count());
                let cand = Best { count, iteration: i, point };
                (better(best, Some(cand)), ops)
            },
        )
        .reduce(
            || (None, OperationCounts::default()),
            |(a, mut oa), (b, ob)| {
                oa += ob;
                (better(a, b), oa)
            },
        );

    let Some(best) = best else {
        let mut r = VoteResult::empty(&unit);
        r.ops_counter = ops;
        return Ok(r);
    };
    let mut ids: Vec<u32> = with_model!(&model, m => inliers(m, &surfaces, &best.point, &slack)
        .flat_map(|s| s.source_ids.iter().copied())
        .collect());
    ids.sort_unstable();
    Ok(VoteResult {
        point: best.point,
        count: best.count,
        inlier_ids: ids,
        ops_counter: ops,
        truncated: iterations == cfg.max_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_alignment_instance, gen_line_instance, gen_pose_instance, gen_ray_instance, AlignmentBracket};

    /// Counts multiplications of the miss probability until it drops to
    /// `1 - confidence`.
    fn iterations_by_product(b: f64, k: usize, conf: f64) -> u64 {
        let miss = 1.0 - b.powi(k as i32);
        let mut all_miss = 1.0;
        let mut n = 0;
        while 1.0 - all_miss < conf {
            all_miss *= miss;
            n += 1;
        }
        n.max(1)
    }

    #[test]
    fn iteration_table() {
        assert_eq!(ransac_iterations(0.5, 2, 0.99).unwrap(), 17);
        assert_eq!(ransac_iterations(0.04, 2, 0.99).unwrap(), 2876);
        assert_eq!(ransac_iterations(1.0, 7, 0.5).unwrap(), 1);
        for b in [0.05, 0.1, 0.3, 0.5, 0.7, 0.9] {
            for k in 1..6 {
                for conf in [0.5, 0.9, 0.95, 0.99] {
                    assert_eq!(
                        ransac_iterations(b, k, conf).unwrap(),
                        iterations_by_product(b, k, conf),
                        "b={b} k={k} conf={conf}"
                    );
                }
            }
        }
    }

    #[test]
    fn iteration_errors_and_cap() {
        assert!(ransac_iterations(0.0, 2, 0.99).is_err());
        assert!(ransac_iterations(1.1, 2, 0.99).is_err());
        assert!(ransac_iterations(0.5, 2, 1.0).is_err());
        assert!(ransac_iterations(0.5, 0, 0.9).is_err());
        assert_eq!(ransac_iterations(1e-200, 3, 0.99).unwrap(), DEFAULT_MAX_ITERATIONS);
        assert_eq!(ransac_iterations_capped(0.001, 2, 0.99, 1000).unwrap(), 1000);
    }

    #[test]
    fn exact_line_is_recovered() {
        let inst = gen_line_instance(60, 1.0, 0.0, 3).unwrap();
        let cfg = RansacConfig::new(0.5, 0.99, Tolerance::uniform(2, 0.002).unwrap(), 1);
        let r = ransac_fit(&inst, ModelTag::Line2, &cfg).unwrap();
        assert_eq!(r.count, 60);
        let truth = inst.truth_unit().unwrap();
        for (a, b) in r.point.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(r.ops_counter.solver_calls, 17);
    }

    #[test]
    fn planted_line_count() {
        let inst = gen_line_instance(1000, 0.04, 0.0005, 8).unwrap();
        let cfg = RansacConfig::new(0.04, 0.99, Tolerance::uniform(2, 0.01).unwrap(), 2);
        let r = ransac_fit(&inst, ModelTag::Line2, &cfg).unwrap();
        assert!(r.count >= 36, "count {}", r.count);
        let gt = &inst.ground_truth.as_ref().unwrap().inlier_ids;
        let hit = gt.iter().filter(|id| r.inlier_ids.binary_search(id).is_ok()).count();
        assert!(hit >= 36);
    }

    #[test]
    fn duplicate_points_are_rejected() {
        let mut inst = gen_line_instance(2, 1.0, 0.0, 1).unwrap();
        if let Items::Points(p) = &mut inst.items {
            p[1] = p[0].clone();
        }
        let cfg = RansacConfig::new(0.5, 0.99, Tolerance::uniform(2, 0.01).unwrap(), 0);
        let r = ransac_fit(&inst, ModelTag::Line2, &cfg).unwrap();
        assert_eq!(r.count, 0);
        assert_eq!(r.ops_counter.solver_calls, 17);
        assert_eq!(r.ops_counter.surface_evaluations, 0);
    }

    #[test]
    fn errors() {
        let inst = gen_line_instance(1, 1.0, 0.0, 1).unwrap();
        let cfg = RansacConfig::new(0.5, 0.99, Tolerance::uniform(2, 0.01).unwrap(), 0);
        assert!(matches!(ransac_fit(&inst, ModelTag::Line2, &cfg), Err(Error::TooFewItems { .. })));
        assert!(matches!(ransac_fit(&inst, ModelTag::Ray3, &cfg), Err(Error::MixedModels(..))));
        let pose = gen_pose_instance(ModelTag::Pose6, 5, 1, 1.0, 0.0, 0).unwrap();
        let cfg6 = RansacConfig::new(0.5, 0.99, Tolerance::uniform(6, 0.05).unwrap(), 0);
        assert!(matches!(ransac_fit(&pose, ModelTag::Pose6, &cfg6), Err(Error::NoMinimalSolver(_))));
    }

    #[test]
    fn other_solvers_find_planted_models() {
        let rays = gen_ray_instance(40, 10, 4).unwrap();
        let cfg = RansacConfig::new(0.25, 0.999, Tolerance::uniform(3, 0.01).unwrap(), 0);
        assert!(ransac_fit(&rays, ModelTag::Ray3, &cfg).unwrap().count >= 10);

        let sim = gen_alignment_instance(40, 0.3, AlignmentBracket::default(), 5).unwrap();
        let cfg = RansacConfig::new(0.3, 0.999, Tolerance::uniform(4, 0.01).unwrap(), 0);
        assert!(ransac_fit(&sim, ModelTag::Sim2, &cfg).unwrap().count >= 12);

        let pose = gen_pose_instance(ModelTag::Pose5, 40, 3, 0.5, 0.0, 6).unwrap();
        let cfg = RansacConfig::new(0.15, 0.999, Tolerance::uniform(5, 0.01).unwrap(), 0);
        let r = ransac_fit(&pose, ModelTag::Pose5, &cfg).unwrap();
        assert!(r.count >= 20, "count {}", r.count);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let inst = gen_line_instance(500, 0.05, 0.001, 9).unwrap();
        let cfg = RansacConfig::new(0.05, 0.99, Tolerance::uniform(2, 0.01).unwrap(), 11);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ransac_fit(&inst, ModelTag::Line2, &cfg).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
