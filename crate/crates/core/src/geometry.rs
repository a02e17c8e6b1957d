//! Axis-aligned boxes in the unit voting cube.

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::Scalar;

pub type Coords<T> = SmallVec<[T; 8]>;

/// Axis-aligned box `[min, max]` in `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AaBox<T> {
    pub min: Coords<T>,
    pub max: Coords<T>,
}

impl<T: Scalar> AaBox<T> {
    pub fn new(min: &[T], max: &[T]) -> Result<Self> {
        if min.len() != max.len() || min.is_empty() {
            return Err(Error::InvalidBox(format!(
                "corner lengths {} and {}",
                min.len(),
                max.len()
            )));
        }
        for (i, (&lo, &hi)) in min.iter().zip(max).enumerate() {
            let tol = T::GRID_TOL;
            if !(lo <= hi) || lo < -tol || hi > T::one() + tol {
                return Err(Error::InvalidBox(format!(
                    "axis {i}: [{lo}, {hi}] is not inside [0,1]"
                )));
            }
        }
        Ok(Self {
            min: min.iter().copied().collect(),
            max: max.iter().copied().collect(),
        })
    }

    pub fn unit(d: usize) -> Self {
        Self {
            min: std::iter::repeat(T::zero()).take(d).collect(),
            max: std::iter::repeat(T::one()).take(d).collect(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    #[inline]
    pub fn side(&self, axis: usize) -> T {
        self.max[axis] - self.min[axis]
    }

    /// Maximum side length.
    pub fn diameter(&self) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc.max(self.side(i)))
    }

    pub fn center(&self) -> Coords<T> {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(&a, &b)| a + (b - a) * T::lit(0.5))
            .collect()
    }

    #[inline]
    pub fn axis(&self, axis: usize) -> Interval<T> {
        Interval {
            lo: self.min[axis],
            hi: self.max[axis],
        }
    }

    pub fn contains(&self, p: &[T]) -> bool {
        p.iter()
            .enumerate()
            .all(|(i, &v)| self.min[i] <= v && v <= self.max[i])
    }

    /// Halves the axes whose bit is set in `mask`. Children come in octant
    /// order: bit `i` of the child index selects the upper half of axis `i`.
    pub fn split(&self, mask: u32) -> Vec<AaBox<T>> {
        let d = self.dim();
        let axes: SmallVec<[usize; 8]> = (0..d).filter(|&i| mask & (1 << i) != 0).collect();
        let count = 1usize << axes.len();
        let mid = self.center();
        let mut out = Vec::with_capacity(count);
        for child in 0..count {
            let mut b = self.clone();
            for (bit, &axis) in axes.iter().enumerate() {
                if child & (1 << bit) != 0 {
                    b.min[axis] = mid[axis];
                } else {
                    b.max[axis] = mid[axis];
                }
            }
            out.push(b);
        }
        out
    }
}

/// Splits `bx` into its `2^d` octants, in octant order.
pub fn subdivide<T: Scalar>(bx: &AaBox<T>) -> Vec<AaBox<T>> {
    let mask = if bx.dim() >= 32 {
        u32::MAX
    } else {
        (1u32 << bx.dim()) - 1
    };
    bx.split(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(min: &[f64], max: &[f64]) -> AaBox<f64> {
        AaBox::new(min, max).unwrap()
    }

    #[test]
    fn unit_square_octants_in_order() {
        let kids = subdivide(&AaBox::<f64>::unit(2));
        assert_eq!(
            kids,
            vec![
                b(&[0.0, 0.0], &[0.5, 0.5]),
                b(&[0.5, 0.0], &[1.0, 0.5]),
                b(&[0.0, 0.5], &[0.5, 1.0]),
                b(&[0.5, 0.5], &[1.0, 1.0]),
            ]
        );
    }

    #[test]
    fn unit_cube_gives_eight_half_boxes() {
        let kids = subdivide(&AaBox::<f64>::unit(3));
        assert_eq!(kids.len(), 8);
        for k in &kids {
            for axis in 0..3 {
                assert_eq!(k.side(axis), 0.5);
            }
        }
    }

    #[test]
    fn halving_a_rectangle() {
        let kids = subdivide(&b(&[0.25, 0.0], &[0.5, 0.5]));
        assert_eq!(kids.len(), 4);
        for k in &kids {
            assert_eq!(k.side(0), 0.125);
            assert_eq!(k.side(1), 0.25);
        }
        let area: f64 = kids.iter().map(|k| k.side(0) * k.side(1)).sum();
        assert_eq!(area, 0.25 * 0.5);
    }

    #[test]
    fn partial_split_only_touches_masked_axes() {
        let kids = AaBox::<f64>::unit(3).split(0b100);
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0].side(0), 1.0);
        assert_eq!(kids[1].min[2], 0.5);
    }

    #[test]
    fn rejects_boxes_outside_unit_cube() {
        assert!(AaBox::new(&[0.0, 0.2], &[1.0, 1.5]).is_err());
        assert!(AaBox::new(&[0.6], &[0.5]).is_err());
    }
}
