//! Minimal solvers: a model hypothesis, as a physical voting-space point,
//! from the smallest sample that determines it. `None` marks a degenerate
//! sample.

use nalgebra::{DMatrix, DVector, Matrix3x4};

use crate::scalar::Scalar;
use crate::surfaces::{Correspondence, Ray3};

const DEGENERATE: f64 = 1e-12;

/// Line `y = a x + b` through two points.
pub fn solve_line<T: Scalar>(p: &[T], q: &[T]) -> Option<Vec<T>> {
    solve_hyperplane(&[p, q])
}

/// Hyperplane `x_d = a_0 + sum a_i x_i` through `d` points, as
/// `(a_1, .., a_{d-1}, a_0)`.
pub fn solve_hyperplane<T: Scalar>(points: &[&[T]]) -> Option<Vec<T>> {
    let d = points.len();
    let mut m = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    for (r, p) in points.iter().enumerate() {
        if p.len() != d {
            return None;
        }
        for c in 0..d - 1 {
            m[(r, c)] = p[c].to_f64_lossy();
        }
        m[(r, d - 1)] = 1.0;
        rhs[r] = p[d - 1].to_f64_lossy();
    }
    let lu = m.lu();
    let det = lu.determinant();
    if !(det.abs() > DEGENERATE) {
        return None;
    }
    let sol = lu.solve(&rhs)?;
    finite(sol.iter().copied())
}

fn finite<T: Scalar>(v: impl Iterator<Item = f64>) -> Option<Vec<T>> {
    v.map(|x| if x.is_finite() { T::from_f64(x) } else { None }).collect()
}

/// Midpoint of the shortest segment between two rays.
pub fn solve_rays<T: Scalar>(r: &Ray3<T>, s: &Ray3<T>) -> Option<Vec<T>> {
    let line = |r: &Ray3<T>| {
        let [a, b, c, d] = [r.a, r.b, r.c, r.d].map(|v| v.to_f64_lossy());
        ([0.0, b, d], [1.0, a, c])
    };
    let ((p, u), (q, v)) = (line(r), line(s));
    let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let w = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    let (uu, uv, vv, uw, vw) = (dot(u, u), dot(u, v), dot(v, v), dot(u, w), dot(v, w));
    let den = uu * vv - uv * uv;
    if !(den > DEGENERATE * uu * vv) {
        return None;
    }
    let sc = (uv * vw - vv * uw) / den;
    let tc = (uu * vw - uv * uw) / den;
    finite((0..3).map(|i| 0.5 * (p[i] + sc * u[i] + q[i] + tc * v[i])))
}

/// Similarity `(a, b, c, d)` taking `p1 -> q1` and `p2 -> q2`.
pub fn solve_similarity<T: Scalar>(m1: &([T; 2], [T; 2]), m2: &([T; 2], [T; 2])) -> Option<Vec<T>> {
    let f = |v: [T; 2]| [v[0].to_f64_lossy(), v[1].to_f64_lossy()];
    let (p1, q1, p2, q2) = (f(m1.0), f(m1.1), f(m2.0), f(m2.1));
    let dp = [p2[0] - p1[0], p2[1] - p1[1]];
    let dq = [q2[0] - q1[0], q2[1] - q1[1]];
    let n2 = dp[0] * dp[0] + dp[1] * dp[1];
    if !(n2 > DEGENERATE) {
        return None;
    }
    // a dp0 + b dp1 = dq0, -b dp0 + a dp1 = dq1
    let a = (dp[0] * dq[0] + dp[1] * dq[1]) / n2;
    let b = (dp[1] * dq[0] - dp[0] * dq[1]) / n2;
    let c = q1[0] - a * p1[0] - b * p1[1];
    let d = q1[1] + b * p1[0] - a * p1[1];
    finite([a, b, c, d].into_iter())
}

/// Three-point resection of a gravity-aligned camera with known focal `f`:
/// `(x, y, z, κ, f)`. The horizontal bearings fix `(x, y, θ)`; each point
/// then yields its own height estimate, and the sample is rejected early
/// when those spread by more than `z_spread`.
pub fn solve_pose5<T: Scalar>(
    c: &[&Correspondence<T>; 3],
    focal: T,
    z_spread: T,
) -> Option<Vec<T>> {
    let f = focal.to_f64_lossy();
    let g = |c: &Correspondence<T>| {
        (
            [c.w[0], c.w[1], c.w[2]].map(|v| v.to_f64_lossy()),
            (c.xi.to_f64_lossy() * f).atan(),
            c.eta.to_f64_lossy(),
        )
    };
    let obs = c.map(g);
    // With α_i = θ + γ_i the bearing constraint
    // sin α_i (w_x - x) - cos α_i (w_y - y) = 0 is linear in
    // (cos θ, sin θ, P, Q), P = cos θ y - sin θ x, Q = -(cos θ x + sin θ y).
    let mut m = Matrix3x4::<f64>::zeros();
    for (r, (w, gam, _)) in obs.iter().enumerate() {
        let (sg, cg) = gam.sin_cos();
        m[(r, 0)] = sg * w[0] - cg * w[1];
        m[(r, 1)] = cg * w[0] + sg * w[1];
        m[(r, 2)] = cg;
        m[(r, 3)] = sg;
    }
    // Null vector by signed 3x3 minors.
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let e = |r: usize, k: usize| m[(r, cols[k])];
        e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
    };
    let n = [minor(0), -minor(1), minor(2), -minor(3)];
    let norm = n[0].hypot(n[1]);
    if !(norm > DEGENERATE) {
        return None;
    }
    let candidates = [1.0, -1.0].map(|sign| {
        let (ct, st) = (sign * n[0] / norm, sign * n[1] / norm);
        let (p, q) = (sign * n[2] / norm, sign * n[3] / norm);
        (ct, st, -st * p - ct * q, ct * p - st * q)
    });
    for (ct, st, x, y) in candidates {
        if !(ct > 0.0) {
            continue;
        }
        let front = obs
            .iter()
            .all(|(w, _, _)| (w[0] - x) * ct + (w[1] - y) * st > 0.0);
        if !front {
            continue;
        }
        let z: Vec<f64> = obs
            .iter()
            .map(|(w, _, eta)| w[2] - eta * f * (w[0] - x).hypot(w[1] - y))
            .collect();
        let (lo, hi) = z
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if hi - lo > z_spread.to_f64_lossy() {
            return None;
        }
        let zm = z.iter().sum::<f64>() / 3.0;
        return finite([x, y, zm, st / ct, f].into_iter());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surfaces::reprojection::project_gravity;
    use crate::surfaces::PoseHypothesis;
    use approx::assert_abs_diff_eq;

    #[test]
    fn line_and_degenerate() {
        let s = solve_line(&[0.0, 0.5], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(s[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], 0.5, epsilon = 1e-12);
        assert!(solve_line(&[0.3, 0.5], &[0.3, 0.5]).is_none());
    }

    #[test]
    fn plane_through_three_points() {
        let pts: [&[f64]; 3] = [&[0.0, 0.0, 0.1], &[1.0, 0.0, 0.3], &[0.0, 1.0, 0.6]];
        let s = solve_hyperplane(&pts).unwrap();
        for (a, b) in s.iter().zip([0.2, 0.5, 0.1]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn rays_meet() {
        let p = [0.4, 0.5, 0.6];
        let r = Ray3::through(p, [0.9, 0.1, 0.2]).unwrap();
        let s = Ray3::through(p, [0.1, 0.8, 0.9]).unwrap();
        let m = solve_rays(&r, &s).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(m[i], p[i], epsilon = 1e-9);
        }
        assert!(solve_rays(&r, &r).is_none());
    }

    #[test]
    fn similarity_from_two_pairs() {
        let sim = crate::surfaces::SimilarityParams::from_scale_angle(1.5, 0.3, 0.2, -0.1);
        let (p1, p2) = ([0.5, 0.2], [-0.3, 0.7]);
        let s = solve_similarity(&(p1, sim.apply(p1)), &(p2, sim.apply(p2))).unwrap();
        for (a, b) in s.iter().zip([sim.a, sim.b, sim.c, sim.d]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn gravity_resection() {
        let pose = PoseHypothesis::gravity([1.0, -2.0, 1.5], 0.3, 0.9);
        let ws = [[12.0, 3.0, 4.0], [15.0, -6.0, 2.0], [9.0, 1.0, -1.0]];
        let cs: Vec<Correspondence<f64>> = ws
            .iter()
            .map(|w| {
                let (xi, eta) = project_gravity(&pose, w).unwrap();
                Correspondence::new(*w, xi, eta)
            })
            .collect();
        let s = solve_pose5(&[&cs[0], &cs[1], &cs[2]], 0.9, 0.01).unwrap();
        for (a, b) in s.iter().zip([1.0, -2.0, 1.5, 0.3, 0.9]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
        // A wrong height on one point trips the early rejection.
        let mut bad = cs[2];
        bad.w[2] += 1.0;
        assert!(solve_pose5(&[&cs[0], &cs[1], &bad], 0.9, 0.5).is_none());
    }
}
