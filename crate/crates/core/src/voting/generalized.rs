//! Recursive voting over a subdivision of the voting cube, with per-box
//! canonization.

use std::sync::Arc;

use rayon::prelude::*;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::geometry::{AaBox, Coords};
use crate::scalar::Scalar;
use crate::surface::{Family, Model, ParametricSurface};
use crate::voting::canonize::canonize_with_report;
use crate::voting::intersect::BoxContext;
use crate::voting::matching::MatchLabels;
use crate::voting::naive::NEIGHBORHOOD;
use crate::voting::{OperationCounts, Tolerance, VoteResult};

/// Recursion settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GvConfig {
    /// Hard depth limit; `None` uses `ceil(log2(1 / min ε)) + 2`.
    pub max_depth: Option<u32>,
    /// Levels near the root whose children are explored in parallel. Each
    /// parallel child starts from the incoming best count, so results and
    /// counters depend on this value but not on the thread count.
    pub parallel_depth: u32,
    /// Canonize the surviving surfaces at every internal box.
    pub canonize: bool,
    /// Skip children whose surface count is below the best leaf found.
    pub prune: bool,
    /// With `prune`, also bound the core count of each child and skip
    /// children that can at best tie the best leaf found so far in
    /// `(count, core)`. Children are then visited in decreasing
    /// `(count, core)` bound order, and full ties go to the first leaf found
    /// instead of the smallest octant path.
    pub prune_ties: bool,
    /// Half-width of the dependent-axis neighbourhood, in units of ε.
    pub neighborhood: f64,
    /// Count one-to-one matches instead of surfaces: a leaf scores the size
    /// of a maximum matching among its surviving items, and inner boxes are
    /// bounded by the fewer of their distinct left and right objects.
    pub matching: Option<Arc<MatchLabels>>,
}

impl Default for GvConfig {
    fn default() -> Self {
        Self {
            max_depth: None,
            parallel_depth: 1,
            canonize: true,
            prune: true,
            prune_ties: false,
            neighborhood: NEIGHBORHOOD,
            matching: None,
        }
    }
}

struct Found<T> {
    count: usize,
    // Surfaces meeting the leaf box itself (up to drift); breaks count ties.
    core: usize,
    point: Coords<T>,
    ids: Vec<u32>,
}

#[derive(Default)]
struct Outcome<T> {
    found: Option<Found<T>>,
    ops: OperationCounts,
    truncated: bool,
}

struct Search<'a, T: Scalar, F: Family<T>> {
    model: &'a Model<T, F>,
    tol: &'a Tolerance<T>,
    cfg: &'a GvConfig,
    leaf: Vec<u32>,
    max_depth: u32,
    base_slack: Coords<T>,
}

impl<T: Scalar, F: Family<T>> Search<'_, T, F> {
    fn leaf_result(&self, surfaces: &[ParametricSurface<T>], bx: &AaBox<T>, drift: &Coords<T>) -> Found<T> {
        let tight: Coords<T> = drift.iter().map(|&d| d + T::GRID_TOL).collect();
        let ctx = BoxContext::new(self.model, bx, &tight);
        let core_surfaces = surfaces.iter().filter(|s| ctx.intersects(self.model, s));
        let mut ids: Vec<u32> = surfaces.iter().flat_map(|s| s.source_ids.iter().copied()).collect();
        ids.sort_unstable();
        let core = match &self.cfg.matching {
            None => core_surfaces.map(|s| s.multiplicity()).sum(),
            Some(labels) => {
                let mut core_ids: Vec<u32> =
                    core_surfaces.flat_map(|s| s.source_ids.iter().copied()).collect();
                core_ids.sort_unstable();
                ids = labels.max_matching(&ids);
                labels.max_matching(&core_ids).len()
            }
        };
        Found {
            count: ids.len(),
            core,
            point: bx.center(),
            ids,
        }
    }

    fn pruned(&self, bound: (usize, usize), floor: (usize, usize)) -> bool {
        self.cfg.prune && (bound.0 < floor.0 || (self.cfg.prune_ties && floor.0 > 0 && bound <= floor))
    }

    /// Slack that bounds the core test at every leaf below a box at `depth`:
    /// the drift so far, plus for each remaining canonization its drift
    /// allowance and the move of the representative (ε'/2 each).
    fn core_slack(&self, depth: &[u32], drift: &Coords<T>) -> Coords<T> {
        let remaining = if self.cfg.canonize {
            depth.iter().zip(&self.leaf).map(|(&d, &l)| l.saturating_sub(d)).max().unwrap_or(0)
        } else {
            0
        };
        let levels = T::from_usize_lossy(remaining as usize);
        self.model
            .dep_axes()
            .iter()
            .zip(drift)
            .map(|(&a, &d)| d + levels * self.tol.eps_prime(a) + T::GRID_TOL)
            .collect()
    }

    fn node(
        &self,
        surfaces: Vec<ParametricSurface<T>>,
        bx: &AaBox<T>,
        depth: &[u32],
        drift: &Coords<T>,
        level: u32,
        best_in: (usize, usize),
    ) -> Outcome<T> {
        let mut out = Outcome::default();
        if surfaces.is_empty() {
            return out;
        }
        let mask: u32 = (0..bx.dim())
            .filter(|&i| depth[i] < self.leaf[i])
            .fold(0, |m, i| m | (1 << i));
        if mask == 0 {
            out.found = Some(self.leaf_result(&surfaces, bx, drift));
            return out;
        }
        if level >= self.max_depth {
            out.found = Some(self.leaf_result(&surfaces, bx, drift));
            out.truncated = true;
            return out;
        }

        let (canon, drift) = if self.cfg.canonize {
            match canonize_with_report(self.model, &surfaces, bx, self.tol) {
                Ok((c, rep)) => {
                    out.ops += rep.ops;
                    let d: Coords<T> = drift.iter().zip(&rep.drift).map(|(&a, &b)| a + b).collect();
                    (c, d)
                }
                Err(_) => (surfaces, drift.clone()),
            }
        } else {
            (surfaces, drift.clone())
        };
        let slack: Coords<T> = self
            .base_slack
            .iter()
            .zip(&drift)
            .map(|(&a, &b)| a + b)
            .collect();

        let mut child_depth: SmallVec<[u32; 8]> = depth.iter().copied().collect();
        for (i, d) in child_depth.iter_mut().enumerate() {
            if mask & (1 << i) != 0 {
                *d += 1;
            }
        }
        let children = bx.split(mask);
        let core_slack = self.core_slack(&child_depth, &drift);
        let mut filtered: Vec<(usize, Vec<u32>, (usize, usize))> = Vec::with_capacity(children.len());
        for (octant, child) in children.iter().enumerate() {
            let ctx = BoxContext::new(self.model, child, &slack);
            out.ops.box_intersection_calls += canon.len() as u64;
            let mut keep = Vec::new();
            let mut bound = 0;
            for (k, s) in canon.iter().enumerate() {
                if ctx.intersects(self.model, s) {
                    keep.push(k as u32);
                    bound += s.multiplicity();
                }
            }
            if let Some(labels) = &self.cfg.matching {
                let ids = keep.iter().flat_map(|&k| canon[k as usize].source_ids.iter().copied());
                bound = labels.distinct_bound(ids);
            }
            if bound == 0 {
                continue;
            }
            let core = if self.cfg.prune_ties {
                let tight = BoxContext::new(self.model, child, &core_slack);
                out.ops.box_intersection_calls += keep.len() as u64;
                let hits = keep.iter().map(|&k| &canon[k as usize]).filter(|s| tight.intersects(self.model, s));
                match &self.cfg.matching {
                    None => hits.map(|s| s.multiplicity()).sum(),
                    Some(labels) => labels.distinct_bound(hits.flat_map(|s| s.source_ids.iter().copied())),
                }
            } else {
                0
            };
            filtered.push((octant, keep, (bound, core)));
        }
        filtered.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)));

        let take = |keep: &[u32]| -> Vec<ParametricSurface<T>> {
            keep.iter().map(|&k| canon[k as usize].clone()).collect()
        };
        let mut best: Option<(usize, Found<T>)> = None;
        let merge = |best: &mut Option<(usize, Found<T>)>, octant: usize, o: Outcome<T>, out: &mut Outcome<T>| {
            out.ops += o.ops;
            out.truncated |= o.truncated;
            if let Some(f) = o.found {
                let wins = match best {
                    None => true,
                    Some((bo, bf)) => {
                        (f.count, f.core) > (bf.count, bf.core)
                            || (!self.cfg.prune_ties
                                && (f.count, f.core) == (bf.count, bf.core)
                                && octant < *bo)
                    }
                };
                if wins {
                    *best = Some((octant, f));
                }
            }
        };

        if level < self.cfg.parallel_depth {
            let live: Vec<_> = filtered
                .iter()
                .filter(|c| !self.pruned(c.2, best_in))
                .collect();
            let results: Vec<(usize, Outcome<T>)> = live
                .par_iter()
                .map(|(octant, keep, _)| {
                    let o = self.node(take(keep), &children[*octant], &child_depth, &drift, level + 1, best_in);
                    (*octant, o)
                })
                .collect();
            for (octant, o) in results {
                merge(&mut best, octant, o, &mut out);
            }
        } else {
            let mut floor = best_in;
            for (octant, keep, bound) in &filtered {
                if self.pruned(*bound, floor) {
                    break;
                }
                let o = self.node(take(keep), &children[*octant], &child_depth, &drift, level + 1, floor);
                if let Some(f) = &o.found {
                    floor = floor.max((f.count, f.core));
                }
                merge(&mut best, *octant, o, &mut out);
            }
        }
        out.found = best.map(|(_, f)| f);
        out
    }
}

/// Recursive voting. Returns the center of an ε-sized box with the most
/// surviving surfaces, where a surface survives in a box if it passes within
/// `1.5ε` plus the accumulated canonization drift of it. The count is never
/// below that of [`crate::voting::naive_vote`] for the same input and ε. Ties
/// go to the box met by the most surfaces without the neighbourhood, then
/// to the lexicographically smallest octant path. With
/// [`GvConfig::matching`] the count is a matching size instead and only the
/// matched ids are reported.
pub fn generalized_vote<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    surfaces: &[ParametricSurface<T>],
    bx: &AaBox<T>,
    tol: &Tolerance<T>,
    cfg: &GvConfig,
) -> Result<VoteResult<T>> {
    model.check_tags(surfaces)?;
    let dims = model.dims();
    tol.check_dim(dims.d)?;
    if bx.dim() != dims.d {
        return Err(Error::Dimension {
            expected: dims.d,
            got: bx.dim(),
        });
    }
    if !(cfg.neighborhood >= 0.0) {
        return Err(Error::InvalidParameter("negative neighbourhood".into()));
    }
    if let Some(labels) = &cfg.matching {
        let n = labels.len();
        if let Some(id) = surfaces.iter().flat_map(|s| s.source_ids.iter()).find(|&&id| id as usize >= n) {
            return Err(Error::InvalidParameter(format!("item id {id} has no match labels (have {n})")));
        }
    }
    if surfaces.is_empty() {
        return Ok(VoteResult::empty(bx));
    }
    let min_eps = tol.min_eps().to_f64_lossy();
    let max_depth = cfg
        .max_depth
        .unwrap_or_else(|| (1.0 / min_eps).log2().ceil().max(0.0) as u32 + 2);
    let search = Search {
        model,
        tol,
        cfg,
        leaf: tol.leaf_depths(bx),
        max_depth,
        base_slack: model
            .dep_axes()
            .iter()
            .map(|&a| tol.eps[a] * T::lit(cfg.neighborhood) + T::GRID_TOL)
            .collect(),
    };
    let zero_depth = vec![0u32; dims.d];
    let drift: Coords<T> = std::iter::repeat(T::zero()).take(dims.free_params()).collect();
    let o = search.node(surfaces.to_vec(), bx, &zero_depth, &drift, 0, (0, 0));
    Ok(match o.found {
        Some(f) => VoteResult {
            point: f.point.to_vec(),
            count: f.count,
            inlier_ids: f.ids,
            ops_counter: o.ops,
            truncated: o.truncated,
        },
        None => {
            let mut r = VoteResult::empty(bx);
            r.ops_counter = o.ops;
            r.truncated = o.truncated;
            r
        }
    })
}

/// Total multiplicity of the surfaces that may meet `bx`: an upper bound on
/// the count of any cell inside it.
pub fn branchless_count_upper_bound<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    surfaces: &[ParametricSurface<T>],
    bx: &AaBox<T>,
) -> usize {
    let slack = vec![T::zero(); model.dims().free_params()];
    let ctx = BoxContext::new(model, bx, &slack);
    surfaces
        .iter()
        .filter(|s| ctx.intersects(model, s))
        .map(|s| s.multiplicity())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SpaceMap;
    use crate::surfaces::line::Line2;
    use crate::voting::naive_vote;

    fn model() -> Model<f64, Line2> {
        Model::new(Line2, SpaceMap::identity(2)).unwrap()
    }

    #[test]
    fn identical_lines() {
        let m = model();
        let s: Vec<_> = (0..3).map(|i| m.surface(&[-0.4], &[0.6], i)).collect();
        let tol = Tolerance::uniform(2, 0.1).unwrap();
        let r = generalized_vote(&m, &s, &AaBox::unit(2), &tol, &GvConfig::default()).unwrap();
        assert_eq!(r.count, 3);
        let b = 0.6 - 0.4 * r.point[0];
        assert!((r.point[1] - b).abs() <= 0.1);
    }

    #[test]
    fn well_separated_lines_count_one() {
        let m = model();
        let s: Vec<_> = (0..5).map(|i| m.surface(&[0.0], &[0.1 + 0.2 * i as f64], i)).collect();
        let tol = Tolerance::uniform(2, 0.02).unwrap();
        let r = generalized_vote(&m, &s, &AaBox::unit(2), &tol, &GvConfig::default()).unwrap();
        assert_eq!(r.count, 1);
        assert_eq!(r.inlier_ids, vec![0]);
    }

    #[test]
    fn dominates_naive_on_crossing_lines() {
        let m = model();
        let s = vec![
            m.surface(&[1.0], &[0.0], 0),
            m.surface(&[-1.0], &[1.0], 1),
            m.surface(&[0.0], &[0.5], 2),
        ];
        let tol = Tolerance::uniform(2, 0.05).unwrap();
        let n = naive_vote(&m, &s, &AaBox::unit(2), &tol).unwrap();
        for canonize in [true, false] {
            let cfg = GvConfig { canonize, ..GvConfig::default() };
            let g = generalized_vote(&m, &s, &AaBox::unit(2), &tol, &cfg).unwrap();
            assert!(g.count >= n.count);
            assert_eq!(g.count, 3);
        }
    }

    #[test]
    fn tie_pruning_keeps_the_winner() {
        for seed in 0..5 {
            let inst = crate::datagen::gen_line_instance(300, 0.1, 0.002, seed).unwrap();
            let m = model();
            let crate::datagen::Items::Points(p) = &inst.items else { unreachable!() };
            let s: Vec<_> = p
                .iter()
                .enumerate()
                .map(|(i, q)| crate::surfaces::line::line_surface_from_point(&m, [q[0], q[1]], i as u32))
                .collect();
            let tol = Tolerance::uniform(2, 1.0 / 64.0).unwrap();
            let exact = generalized_vote(&m, &s, &AaBox::unit(2), &tol, &GvConfig::default()).unwrap();
            let cfg = GvConfig { prune_ties: true, ..GvConfig::default() };
            let fast = generalized_vote(&m, &s, &AaBox::unit(2), &tol, &cfg).unwrap();
            assert_eq!(fast.count, exact.count);
            assert_eq!(fast.point, exact.point);
        }
    }

    #[test]
    fn depth_limit_truncates() {
        let m = model();
        let s = vec![m.surface(&[0.0], &[0.5], 0)];
        let tol = Tolerance::uniform(2, 0.01).unwrap();
        let cfg = GvConfig { max_depth: Some(2), ..GvConfig::default() };
        let r = generalized_vote(&m, &s, &AaBox::unit(2), &tol, &cfg).unwrap();
        assert!(r.truncated);
        assert_eq!(r.count, 1);
    }

    #[test]
    fn upper_bound_counts() {
        let m = model();
        let far: Vec<_> = (0..5).map(|i| m.surface(&[0.0], &[2.0 + i as f64], i)).collect();
        assert_eq!(branchless_count_upper_bound(&m, &far, &AaBox::unit(2)), 0);
        let near: Vec<_> = (0..5).map(|i| m.surface(&[0.0], &[0.1 * i as f64], i)).collect();
        assert_eq!(branchless_count_upper_bound(&m, &near, &AaBox::unit(2)), 5);
    }
}
