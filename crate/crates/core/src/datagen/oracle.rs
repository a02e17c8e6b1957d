//! Brute-force reference for grid voting: every cell of the full grid is
//! scored against every surface. Exponential in `d`; meant for small tests.

use crate::error::{Error, Result};
use crate::geometry::AaBox;
use crate::scalar::Scalar;
use crate::surface::{Family, Model, ParametricSurface};
use crate::voting::{OperationCounts, Tolerance, VoteResult};

const HALF_WIDTH: f64 = 1.5;
const MAX_CELLS: u64 = 1 << 26;

/// Scores each cell center `c` by the surfaces whose value at the free
/// coordinates of `c` comes within `1.5ε` of the cell on every dependent
/// axis. Ties go to the cell containing the most surface values, then to
/// the first cell in row-major order.
pub fn brute_force_vote<T: Scalar, F: Family<T>>(
    model: &Model<T, F>,
    surfaces: &[ParametricSurface<T>],
    bx: &AaBox<T>,
    tol: &Tolerance<T>,
) -> Result<VoteResult<T>> {
    let d = model.dims().d;
    let cells_per_axis: Vec<u64> = (0..d)
        .map(|a| {
            let mut n = 1u64;
            while bx.side(a) / T::from_usize_lossy(n as usize) > tol.eps[a] * (T::one() + T::GRID_TOL) {
                n *= 2;
            }
            n
        })
        .collect();
    let total: u64 = cells_per_axis.iter().product();
    if total > MAX_CELLS {
        return Err(Error::GridTooFine(format!("{total} cells for brute force")));
    }
    let h: Vec<T> = (0..d)
        .map(|a| bx.side(a) / T::from_usize_lossy(cells_per_axis[a] as usize))
        .collect();
    let dep = model.dep_axes();

    let mut best: Option<(usize, usize, Vec<u64>)> = None;
    let mut idx = vec![0u64; d];
    for _ in 0..total {
        let lo: Vec<T> = (0..d).map(|a| bx.min[a] + T::from_usize_lossy(idx[a] as usize) * h[a]).collect();
        let center: Vec<T> = (0..d).map(|a| lo[a] + h[a] * T::lit(0.5)).collect();
        let (mut count, mut core) = (0, 0);
        for s in surfaces {
            let Ok(v) = model.eval_at(&center, s) else { continue };
            let mut near = true;
            let mut inside = true;
            for (j, &a) in dep.iter().enumerate() {
                let half = tol.eps[a] * T::lit(HALF_WIDTH);
                let slop = T::GRID_TOL * h[a];
                let y = v[j];
                near &= y.is_finite() && lo[a] + h[a] >= y - half - slop && lo[a] <= y + half + slop;
                inside &= y >= lo[a] - T::GRID_TOL && y <= lo[a] + h[a] + T::GRID_TOL;
            }
            if near {
                count += s.multiplicity();
                if inside {
                    core += s.multiplicity();
                }
            }
        }
        if count > 0 && best.as_ref().is_none_or(|b| (count, core) > (b.0, b.1)) {
            best = Some((count, core, idx.clone()));
        }
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < cells_per_axis[a] {
                break;
            }
            idx[a] = 0;
        }
    }

    let Some((count, _, cell)) = best else {
        return Ok(VoteResult {
            point: bx.center().to_vec(),
            count: 0,
            inlier_ids: Vec::new(),
            ops_counter: OperationCounts::default(),
            truncated: false,
        });
    };
    let point: Vec<T> = (0..d)
        .map(|a| bx.min[a] + (T::from_usize_lossy(cell[a] as usize) + T::lit(0.5)) * h[a])
        .collect();
    let mut ids: Vec<u32> = surfaces
        .iter()
        .filter(|s| {
            let Ok(v) = model.eval_at(&point, s) else { return false };
            dep.iter().enumerate().all(|(j, &a)| {
                let half = tol.eps[a] * T::lit(HALF_WIDTH);
                let slop = T::GRID_TOL * h[a];
                let lo = point[a] - h[a] * T::lit(0.5);
                v[j].is_finite() && lo + h[a] >= v[j] - half - slop && lo <= v[j] + half + slop
            })
        })
        .flat_map(|s| s.source_ids.iter().copied())
        .collect();
    ids.sort_unstable();
    debug_assert_eq!(ids.len(), count);
    Ok(VoteResult {
        point,
        count,
        inlier_ids: ids,
        ops_counter: OperationCounts::default(),
        truncated: false,
    })
}
