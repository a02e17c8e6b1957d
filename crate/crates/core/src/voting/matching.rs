//! One-to-one counting for correspondence-free problems, where each item
//! pairs a left object (a scene point) with a right object (an image
//! feature) and a consistent set may use each object at most once.

use crate::error::{Error, Result};

/// Item `id` pairs `left[id]` with `right[id]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchLabels {
    left: Vec<u32>,
    right: Vec<u32>,
}

impl MatchLabels {
    pub fn new(left: Vec<u32>, right: Vec<u32>) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::Dimension {
                expected: left.len(),
                got: right.len(),
            });
        }
        Ok(Self { left, right })
    }

    /// All pairs of `n_left × n_right` objects, item `i·n_right + j` pairing
    /// `i` with `j`.
    pub fn grid(n_left: usize, n_right: usize) -> Self {
        let n = n_left * n_right;
        Self {
            left: (0..n).map(|id| (id / n_right.max(1)) as u32).collect(),
            right: (0..n).map(|id| (id % n_right.max(1)) as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn pair(&self, id: u32) -> (u32, u32) {
        (self.left[id as usize], self.right[id as usize])
    }

    /// `min(distinct left, distinct right)` over `ids`, an upper bound on
    /// the matching size that only shrinks on subsets.
    pub fn distinct_bound(&self, ids: impl Iterator<Item = u32>) -> usize {
        let (mut l, mut r): (Vec<u32>, Vec<u32>) = ids.map(|id| self.pair(id)).unzip();
        l.sort_unstable();
        l.dedup();
        r.sort_unstable();
        r.dedup();
        l.len().min(r.len())
    }

    /// Ids of a maximum one-to-one subset of `ids`, sorted. Deterministic:
    /// left objects are augmented in increasing order over edges in
    /// increasing id order.
    pub fn max_matching(&self, ids: &[u32]) -> Vec<u32> {
        let mut edges: Vec<(u32, u32, u32)> = ids
            .iter()
            .map(|&id| {
                let (l, r) = self.pair(id);
                (l, r, id)
            })
            .collect();
        edges.sort_unstable();
        edges.dedup_by_key(|e| (e.0, e.1));
        let mut lefts: Vec<u32> = edges.iter().map(|e| e.0).collect();
        lefts.dedup();
        let mut rights: Vec<u32> = edges.iter().map(|e| e.1).collect();
        rights.sort_unstable();
        rights.dedup();
        let ridx = |r: u32| rights.binary_search(&r).expect("right label present");
        let mut adj: Vec<Vec<(usize, u32)>> = vec![Vec::new(); lefts.len()];
        let mut li = 0;
        for &(l, r, id) in &edges {
            while lefts[li] != l {
                li += 1;
            }
            adj[li].push((ridx(r), id));
        }

        // owner[r] = (left index, edge id) currently matched to right r
        let mut owner: Vec<Option<(usize, u32)>> = vec![None; rights.len()];
        fn augment(
            u: usize,
            adj: &[Vec<(usize, u32)>],
            owner: &mut [Option<(usize, u32)>],
            seen: &mut [bool],
        ) -> bool {
            for &(r, id) in &adj[u] {
                if seen[r] {
                    continue;
                }
                seen[r] = true;
                let free = match owner[r] {
                    None => true,
                    Some((v, _)) => augment(v, adj, owner, seen),
                };
                if free {
                    owner[r] = Some((u, id));
                    return true;
                }
            }
            false
        }
        let mut seen = vec![false; rights.len()];
        for u in 0..lefts.len() {
            seen.iter_mut().for_each(|s| *s = false);
            augment(u, &adj, &mut owner, &mut seen);
        }
        let mut out: Vec<u32> = owner.iter().flatten().map(|&(_, id)| id).collect();
        out.sort_unstable();
        out
    }
}
