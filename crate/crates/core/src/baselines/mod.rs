//! Comparison algorithms sharing the voting operation counters: RANSAC over
//! minimal solvers, and branch and bound (recursive voting without
//! canonization).

mod ransac;
pub mod solvers;

pub use ransac::{
    minimal_set_size, ransac_fit, ransac_iterations, ransac_iterations_capped, RansacConfig,
    DEFAULT_MAX_ITERATIONS,
};

use crate::error::Result;
use crate::geometry::AaBox;
use crate::scalar::Scalar;
use crate::surface::{Family, Model, ParametricSurface};
use crate::voting::{generalized_vote, GvConfig, Tolerance, VoteResult};

/// Recursive voting with the surface count of a box as its only bound.
pub fn branch_and_bound<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    surfaces: &[ParametricSurface<T>],
    bx: &AaBox<T>,
    tol: &Tolerance<T>,
) -> Result<VoteResult<T>> {
    branch_and_bound_with(model, surfaces, bx, tol, &GvConfig::default())
}

/// [`branch_and_bound`] with the remaining recursion settings of `cfg`;
/// canonization is always off and pruning always on.
pub fn branch_and_bound_with<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    surfaces: &[ParametricSurface<T>],
    bx: &AaBox<T>,
    tol: &Tolerance<T>,
    cfg: &GvConfig,
) -> Result<VoteResult<T>> {
    let cfg = GvConfig {
        canonize: false,
        prune: true,
        ..cfg.clone()
    };
    generalized_vote(model, surfaces, bx, tol, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SpaceMap;
    use crate::surfaces::line::{line_surface_from_point, Line2};
    use crate::voting::branchless_count_upper_bound;

    fn model() -> Model<f64, Line2> {
        Model::new(Line2, SpaceMap::identity(2)).unwrap()
    }

    #[test]
    fn identical_surfaces_match_voting() {
        let m = model();
        let s: Vec<_> = (0..5).map(|i| line_surface_from_point(&m, [0.3, 0.6], i)).collect();
        let tol = Tolerance::uniform(2, 0.01).unwrap();
        let bx = AaBox::unit(2);
        let b = branch_and_bound(&m, &s, &bx, &tol).unwrap();
        let g = generalized_vote(&m, &s, &bx, &tol, &GvConfig::default()).unwrap();
        assert_eq!(b.count, 5);
        assert_eq!(b.count, g.count);
        assert_eq!(b.inlier_ids, g.inlier_ids);
    }

    #[test]
    fn single_surface_stays_near_its_path() {
        let m = model();
        let s = vec![line_surface_from_point(&m, [0.4, 0.7], 0)];
        let tol = Tolerance::uniform(2, 1.0 / 64.0).unwrap();
        let bx = AaBox::unit(2);
        let r = branch_and_bound(&m, &s, &bx, &tol).unwrap();
        assert_eq!(r.count, 1);
        // Ties are explored for the tie-break, so every box along the line
        // is visited: at most about 3 * 2^l boxes at level l, 4 tests each.
        let bound: u64 = (0..6).map(|l| 4 * 3 << l).sum();
        assert!(r.ops_counter.box_intersection_calls <= bound, "{:?}", r.ops_counter);
        assert_eq!(branchless_count_upper_bound(&m, &s, &bx), 1);
    }
}
