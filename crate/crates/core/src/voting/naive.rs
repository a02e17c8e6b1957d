//! Grid voting: render every surface on the ε-grid and tally per cell.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::geometry::AaBox;
use crate::scalar::Scalar;
use crate::surface::{Family, Model, ParametricSurface};
use crate::voting::{OperationCounts, Tolerance, VoteResult};

/// Half-width of the neighbourhood, in units of ε, in which a surface votes.
pub(crate) const NEIGHBORHOOD: f64 = 1.5;

const DENSE_LIMIT: u128 = 1 << 24;

// Each entry packs the vote count in the high half and the core count (votes
// from surfaces passing through the cell itself) in the low half, so that
// ordering the packed value orders by (count, core).
enum Tally {
    Dense(Vec<u64>),
    Sparse(HashMap<u128, u64>),
}

impl Tally {
    #[inline]
    fn add(&mut self, cell: u128, w: u64) {
        match self {
            Tally::Dense(v) => v[cell as usize] += w,
            Tally::Sparse(m) => *m.entry(cell).or_insert(0) += w,
        }
    }

    // Highest count, smallest index among ties.
    fn best(&self) -> Option<(u128, u64)> {
        match self {
            Tally::Dense(v) => {
                let mut best: Option<(u128, u64)> = None;
                for (i, &c) in v.iter().enumerate() {
                    if c > 0 && best.is_none_or(|(_, b)| c > b) {
                        best = Some((i as u128, c));
                    }
                }
                best
            }
            Tally::Sparse(m) => m
                .iter()
                .filter(|(_, &c)| c > 0)
                .map(|(&k, &c)| (k, c))
                .min_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0))),
        }
    }
}

struct Grid<T> {
    n: Vec<u64>,
    h: Vec<T>,
    lo: Vec<T>,
    stride: Vec<u128>,
}

impl<T: Scalar> Grid<T> {
    fn new(bx: &AaBox<T>, tol: &Tolerance<T>) -> Result<Self> {
        let depths = tol.leaf_depths(bx);
        let bits: u32 = depths.iter().sum();
        if bits > 120 {
            return Err(Error::GridTooFine(format!("{bits} index bits")));
        }
        let d = bx.dim();
        let n: Vec<u64> = depths.iter().map(|&m| 1u64 << m).collect();
        let h = (0..d)
            .map(|i| bx.side(i) / T::from_usize_lossy(n[i] as usize))
            .collect();
        let mut stride = vec![1u128; d];
        for i in (0..d.saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] * n[i + 1] as u128;
        }
        Ok(Self {
            n,
            h,
            lo: bx.min.to_vec(),
            stride,
        })
    }

    fn total(&self) -> u128 {
        self.stride[0] * self.n[0] as u128
    }

    fn center(&self, axis: usize, i: u64) -> T {
        self.lo[axis] + (T::from_usize_lossy(i as usize) + T::lit(0.5)) * self.h[axis]
    }

    // Closed overlap of [a, b] with the cells of `axis`.
    fn span(&self, axis: usize, a: T, b: T) -> Option<(u64, u64)> {
        let tol = T::GRID_TOL;
        let h = self.h[axis];
        let lo = ((a - self.lo[axis]) / h - T::one() - tol).ceil().max(T::zero());
        let hi = ((b - self.lo[axis]) / h + tol)
            .floor()
            .min(T::from_usize_lossy(self.n[axis] as usize - 1));
        if !(lo <= hi) {
            return None;
        }
        Some((lo.to_u64()?, hi.to_u64()?))
    }
}

/// Dependent-cell spans of `s` at a free cell, or `None` when it casts no vote.
fn spans<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    grid: &Grid<T>,
    prep: &crate::surface::Prepared<T, T, F>,
    s: &ParametricSurface<T>,
    half: &[T],
    out: &mut [T],
) -> Option<SmallVec<[(u64, u64); 4]>> {
    model.eval_prepared(prep, s, out).ok()?;
    model
        .dep_axes()
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            let v = out[j];
            if !v.is_finite() {
                return None;
            }
            grid.span(a, v - half[j], v + half[j])
        })
        .collect()
}

/// Grid voting over `bx`. Each surface is evaluated at the center of every
/// free-coordinate cell and votes once for every cell its `±1.5ε` dependent
/// neighbourhood overlaps. Returns the center of the winning cell; ties go
/// to the cell containing the most surface values itself, then to the
/// lexicographically smallest cell index.
pub fn naive_vote<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    surfaces: &[ParametricSurface<T>],
    bx: &AaBox<T>,
    tol: &Tolerance<T>,
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
    if surfaces.is_empty() {
        return Ok(VoteResult::empty(bx));
    }

    let grid = Grid::new(bx, tol)?;
    let free = model.free_axes();
    let dep = model.dep_axes();
    let free_cells: u128 = free.iter().map(|&a| grid.n[a] as u128).product();
    if free_cells > 1 << 40 {
        return Err(Error::GridTooFine(format!("{free_cells} free cells")));
    }
    let half: SmallVec<[T; 4]> = dep
        .iter()
        .map(|&a| tol.eps[a] * T::lit(NEIGHBORHOOD))
        .collect();

    let mut tally = if grid.total() <= DENSE_LIMIT {
        Tally::Dense(vec![0; grid.total() as usize])
    } else {
        Tally::Sparse(HashMap::new())
    };
    let mut ops = OperationCounts::default();
    let mut out: SmallVec<[T; 4]> = SmallVec::from_elem(T::zero(), dep.len());
    let mut fidx: SmallVec<[u64; 8]> = SmallVec::from_elem(0, free.len());
    let mut xs: SmallVec<[T; 8]> = SmallVec::from_elem(T::zero(), free.len());

    for _ in 0..free_cells {
        let mut base: u128 = 0;
        for (q, &a) in free.iter().enumerate() {
            xs[q] = grid.center(a, fidx[q]);
            base += grid.stride[a] * fidx[q] as u128;
        }
        let prep = model.prepare(&xs);
        for s in surfaces {
            ops.surface_evaluations += 1;
            let Some(sp) = spans(model, &grid, &prep, s, &half, &mut out) else {
                continue;
            };
            let w = s.multiplicity() as u64;
            let mut cur: SmallVec<[u64; 4]> = sp.iter().map(|r| r.0).collect();
            'cells: loop {
                let mut cell = base;
                for (j, &a) in dep.iter().enumerate() {
                    cell += grid.stride[a] * cur[j] as u128;
                }
                let inside = dep.iter().enumerate().all(|(j, &a)| {
                    let lo = grid.lo[a] + T::from_usize_lossy(cur[j] as usize) * grid.h[a];
                    out[j] >= lo - T::GRID_TOL && out[j] <= lo + grid.h[a] + T::GRID_TOL
                });
                tally.add(cell, (w << 32) | if inside { w } else { 0 });
                ops.cells_touched += 1;
                for j in (0..dep.len()).rev() {
                    if cur[j] < sp[j].1 {
                        cur[j] += 1;
                        continue 'cells;
                    }
                    cur[j] = sp[j].0;
                }
                break;
            }
        }
        for q in (0..free.len()).rev() {
            fidx[q] += 1;
            if fidx[q] < grid.n[free[q]] {
                break;
            }
            fidx[q] = 0;
        }
    }

    let Some((cell, _)) = tally.best() else {
        let mut r = VoteResult::empty(bx);
        r.ops_counter = ops;
        return Ok(r);
    };
    let idx: Vec<u64> = (0..dims.d)
        .map(|a| ((cell / grid.stride[a]) % grid.n[a] as u128) as u64)
        .collect();
    let point: Vec<T> = (0..dims.d).map(|a| grid.center(a, idx[a])).collect();

    let fx: SmallVec<[T; 8]> = free.iter().map(|&a| point[a]).collect();
    let prep = model.prepare(&fx);
    let mut ids = Vec::new();
    for s in surfaces {
        ops.surface_evaluations += 1;
        if let Some(sp) = spans(model, &grid, &prep, s, &half, &mut out) {
            let hit = dep
                .iter()
                .zip(&sp)
                .all(|(&a, &(lo, hi))| lo <= idx[a] && idx[a] <= hi);
            if hit {
                ids.extend(s.source_ids.iter().copied());
            }
        }
    }
    ids.sort_unstable();
    Ok(VoteResult {
        point,
        count: ids.len(),
        inlier_ids: ids,
        ops_counter: ops,
        truncated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SpaceMap;
    use crate::surfaces::line::Line2;

    fn model() -> Model<f64, Line2> {
        Model::new(Line2, SpaceMap::identity(2)).unwrap()
    }

    #[test]
    fn identical_lines() {
        let m = model();
        let s: Vec<_> = (0..3).map(|i| m.surface(&[0.3], &[0.2], i)).collect();
        let r = naive_vote(&m, &s, &AaBox::unit(2), &Tolerance::uniform(2, 0.1).unwrap()).unwrap();
        assert_eq!(r.count, 3);
        assert_eq!(r.inlier_ids, vec![0, 1, 2]);
    }

    #[test]
    fn crossing_lines() {
        let m = model();
        let s = vec![m.surface(&[1.0], &[0.0], 0), m.surface(&[-1.0], &[1.0], 1)];
        let tol = Tolerance::uniform(2, 0.1).unwrap();
        let r = naive_vote(&m, &s, &AaBox::unit(2), &tol).unwrap();
        assert_eq!(r.count, 2);
        // b = a and b = 1 - a cross at (0.5, 0.5)
        assert!((r.point[0] - 0.5).abs() <= 0.1 && (r.point[1] - 0.5).abs() <= 0.1);
    }

    #[test]
    fn empty_input() {
        let m = model();
        let r = naive_vote(&m, &[], &AaBox::unit(2), &Tolerance::uniform(2, 0.1).unwrap()).unwrap();
        assert_eq!(r.count, 0);
        assert_eq!(r.point, vec![0.5, 0.5]);
    }

    #[test]
    fn grid_edges_use_tolerance() {
        let m = model();
        let tol = Tolerance::uniform(2, 0.125).unwrap();
        let grid = Grid::new(&AaBox::unit(2), &tol).unwrap();
        assert_eq!(grid.span(1, 0.25, 0.5), Some((1, 4)));
        assert_eq!(grid.span(1, -1.0, -0.5), None);
        assert_eq!(grid.span(1, 0.9, 2.0), Some((7, 7)));
        let _ = m;
    }
}
