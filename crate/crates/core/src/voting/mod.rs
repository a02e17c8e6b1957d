//! Grid voting and canonized recursive voting.

mod canonize;
mod generalized;
mod intersect;
mod matching;
mod naive;

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AaBox;
use crate::scalar::Scalar;

pub use canonize::{canonical_count_bound, canonize, canonize_with_report, round_to_step, CanonizeReport};
pub use generalized::{branchless_count_upper_bound, generalized_vote, GvConfig};
pub use intersect::{intersects_box, intersects_box_exact, BoxContext};
pub use matching::MatchLabels;
pub use naive::naive_vote;

/// Per-coordinate voting tolerance, in normalized units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerance<T> {
    pub eps: Vec<T>,
    /// The constant `c` in `ε' = ε / (c log2(1/ε))`.
    pub eps_prime_scale: T,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(eps: Vec<T>, eps_prime_scale: T) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::InvalidTolerance("empty ε vector".into()));
        }
        for (i, &e) in eps.iter().enumerate() {
            if !(e > T::zero() && e <= T::one()) {
                return Err(Error::InvalidTolerance(format!("ε[{i}] = {e} outside (0, 1]")));
            }
        }
        if !(eps_prime_scale > T::zero()) || !eps_prime_scale.is_finite() {
            return Err(Error::InvalidTolerance(format!(
                "scale c = {eps_prime_scale} must be positive"
            )));
        }
        Ok(Self { eps, eps_prime_scale })
    }

    pub fn uniform(d: usize, eps: T) -> Result<Self> {
        Self::new(vec![eps; d], T::one())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.eps.len()
    }

    /// `ε'` for axis `axis`. The logarithm is clamped at 1 so that coarse
    /// tolerances are not inflated.
    pub fn eps_prime(&self, axis: usize) -> T {
        let e = self.eps[axis];
        let log = (T::one() / e).log2().max(T::one());
        e / (self.eps_prime_scale * log)
    }

    pub fn min_eps(&self) -> T {
        self.eps.iter().copied().fold(T::infinity(), T::min)
    }

    /// Number of halvings of `bx` along each axis until its side is at most ε.
    pub fn leaf_depths(&self, bx: &AaBox<T>) -> Vec<u32> {
        (0..bx.dim())
            .map(|i| {
                let mut side = bx.side(i);
                let mut m = 0;
                while side > self.eps[i] * (T::one() + T::GRID_TOL) && m < 60 {
                    side = side * T::lit(0.5);
                    m += 1;
                }
                m
            })
            .collect()
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::Dimension {
                expected: d,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// Dominant-operation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationCounts {
    pub box_intersection_calls: u64,
    pub surface_evaluations: u64,
    pub cells_touched: u64,
    /// Minimal-solver invocations (RANSAC only).
    pub solver_calls: u64,
}

impl AddAssign for OperationCounts {
    fn add_assign(&mut self, o: Self) {
        self.box_intersection_calls += o.box_intersection_calls;
        self.surface_evaluations += o.surface_evaluations;
        self.cells_touched += o.cells_touched;
        self.solver_calls += o.solver_calls;
    }
}

/// Output of a vote: the winning point (normalized coordinates), its score and
/// the sorted ids of the input items behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteResult<T> {
    pub point: Vec<T>,
    pub count: usize,
    pub inlier_ids: Vec<u32>,
    pub ops_counter: OperationCounts,
    /// The recursion hit its depth limit before reaching ε-sized cells.
    pub truncated: bool,
}

impl<T: Scalar> VoteResult<T> {
    pub(crate) fn empty(bx: &AaBox<T>) -> Self {
        Self {
            point: bx.center().to_vec(),
            count: 0,
            inlier_ids: Vec::new(),
            ops_counter: OperationCounts::default(),
            truncated: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_prime_uses_binary_log() {
        let t = Tolerance::uniform(2, 0.01).unwrap();
        approx::assert_abs_diff_eq!(t.eps_prime(0), 0.01 / 100f64.log2(), epsilon = 1e-15);
        let coarse = Tolerance::uniform(1, 0.9).unwrap();
        assert_eq!(coarse.eps_prime(0), 0.9);
        let scaled = Tolerance::new(vec![0.25], 2.0).unwrap();
        assert_eq!(scaled.eps_prime(0), 0.0625);
    }

    #[test]
    fn invalid_tolerances() {
        assert!(Tolerance::<f64>::new(vec![], 1.0).is_err());
        assert!(Tolerance::new(vec![0.0], 1.0).is_err());
        assert!(Tolerance::new(vec![1.5], 1.0).is_err());
        assert!(Tolerance::new(vec![0.1], 0.0).is_err());
    }

    #[test]
    fn leaf_depths_per_axis() {
        let t = Tolerance::new(vec![0.1, 0.25, 1.0], 1.0).unwrap();
        assert_eq!(t.leaf_depths(&AaBox::unit(3)), vec![4, 2, 0]);
        let t = Tolerance::uniform(1, 0.125).unwrap();
        assert_eq!(t.leaf_depths(&AaBox::unit(1)), vec![3]);
    }
}
