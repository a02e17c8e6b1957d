//! Angle-axis rotations. `rotation(φ)` is the world-to-camera rotation whose
//! rows are `r1, r2, r3`.

use crate::interval::Interval;
use crate::scalar::{Real, Scalar};

pub type Mat3<R> = [[R; 3]; 3];

/// Rodrigues' formula, valid for scalar and interval arguments.
pub fn rotation<T: Scalar, R: Real<T>>(phi: &[R]) -> Mat3<R> {
    let (p0, p1, p2) = (phi[0], phi[1], phi[2]);
    let (s0, s1, s2) = (p0.sq(), p1.sq(), p2.sq());
    let (a, b) = R::rodrigues_coeffs(s0 + s1 + s2);
    let one = R::c(1.0);
    let bound = T::one();
    [
        [
            (one - b * (s1 + s2)).clamp_abs(bound),
            (b * p0 * p1 - a * p2).clamp_abs(bound),
            (b * p0 * p2 + a * p1).clamp_abs(bound),
        ],
        [
            (b * p0 * p1 + a * p2).clamp_abs(bound),
            (one - b * (s0 + s2)).clamp_abs(bound),
            (b * p1 * p2 - a * p0).clamp_abs(bound),
        ],
        [
            (b * p0 * p2 - a * p1).clamp_abs(bound),
            (b * p1 * p2 + a * p0).clamp_abs(bound),
            (one - b * (s0 + s1)).clamp_abs(bound),
        ],
    ]
}

#[inline]
pub fn dot<T: Scalar, R: Real<T>>(row: &[R; 3], w: &[R]) -> R {
    row[0] * w[0] + row[1] * w[1] + row[2] * w[2]
}

pub fn mat_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).fold(T::zero(), |acc, k| acc + a[i][k] * b[k][j]);
        }
    }
    out
}

pub fn transpose<T: Scalar>(a: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn mat_vec<T: Scalar>(a: &Mat3<T>, v: &[T; 3]) -> [T; 3] {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

/// `|φ|²` up to which [`rotation_derivatives`] applies; below it the
/// derivatives of both Rodrigues coefficients are increasing in `|φ|²`.
const DERIV_MAX_SQ: f64 = 1.6;

// d/du of sin(√u)/√u and (1 - cos √u)/u by their alternating series.
fn rodrigues_coeff_derivs<T: Scalar>(u: T) -> (T, T) {
    let (mut da, mut db) = (T::zero(), T::zero());
    let mut pow = T::one();
    let mut fact = T::lit(6.0); // (2n+1)! at n = 1
    for n in 1..12 {
        let sign = if n % 2 == 1 { -T::one() } else { T::one() };
        let nn = T::from_usize_lossy(n);
        let f2 = T::from_usize_lossy(2 * n + 2);
        da = da + sign * nn * pow / fact;
        db = db + sign * nn * pow / (fact * f2);
        pow = pow * u;
        fact = fact * f2 * T::from_usize_lossy(2 * n + 3);
    }
    (da, db)
}

/// Enclosures of `∂R/∂φ_i` over a box of rotation vectors, or `None` when
/// the box reaches `|φ|² > 1.6`.
pub fn rotation_derivatives<T: Scalar>(phi: &[Interval<T>]) -> Option<[Mat3<Interval<T>>; 3]> {
    let u = phi[0].sq() + phi[1].sq() + phi[2].sq();
    let (ulo, uhi) = (u.lo.max(T::zero()), u.hi);
    if !(uhi <= T::lit(DERIV_MAX_SQ)) {
        return None;
    }
    let (a, b) = Interval::rodrigues_coeffs(u);
    let pad = T::lit(1e-13);
    let (da_lo, db_lo) = rodrigues_coeff_derivs(ulo);
    let (da_hi, db_hi) = rodrigues_coeff_derivs(uhi);
    let da = Interval::new(da_lo - pad, da_hi + pad);
    let db = Interval::new(db_lo - pad, db_hi + pad);
    let zero = Interval::point(T::zero());
    let two = Interval::point(T::lit(2.0));
    let p = [phi[0], phi[1], phi[2]];
    let k = [
        [zero, -p[2], p[1]],
        [p[2], zero, -p[0]],
        [-p[1], p[0], zero],
    ];
    let diag = db * u + b;
    Some(std::array::from_fn(|i| {
        let pi2 = two * p[i];
        std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                let mut v = pi2 * (da * k[r][c] + db * p[r] * p[c]);
                if r == c {
                    v = v - pi2 * diag;
                }
                // a E_i, with E_i the cross-product matrix of e_i
                let e = match (r, c) {
                    _ if (r + 1) % 3 == c && (c + 1) % 3 == i => -1.0,
                    _ if (c + 1) % 3 == r && (r + 1) % 3 == i => 1.0,
                    _ => 0.0,
                };
                if e != 0.0 {
                    v = v + a * Interval::point(T::lit(e));
                }
                // b (e_i φᵀ + φ e_iᵀ)
                if r == i {
                    v = v + b * p[c];
                }
                if c == i {
                    v = v + b * p[r];
                }
                v
            })
        })
    }))
}

/// Inverse of [`rotation`]; returns `φ` with `|φ| <= π`.
pub fn rotation_log<T: Scalar>(r: &Mat3<T>) -> [T; 3] {
    let half = T::lit(0.5);
    let cos = ((r[0][0] + r[1][1] + r[2][2] - T::one()) * half)
        .max(-T::one())
        .min(T::one());
    let theta = cos.acos();
    let v = [r[2][1] - r[1][2], r[0][2] - r[2][0], r[1][0] - r[0][1]];
    if theta < T::lit(1e-7) {
        return [v[0] * half, v[1] * half, v[2] * half];
    }
    if T::PI() - theta < T::lit(1e-5) {
        // Near π the antisymmetric part vanishes; recover the axis from R + I.
        let diag = [r[0][0], r[1][1], r[2][2]];
        let k = (0..3)
            .max_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap())
            .unwrap();
        let mut axis = [T::zero(); 3];
        axis[k] = ((diag[k] + T::one()) * half).max(T::zero()).sqrt();
        for j in 0..3 {
            if j != k {
                axis[j] = (r[k][j] + r[j][k]) * half / (T::lit(2.0) * axis[k]);
            }
        }
        let mut n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2] < T::zero() {
            n = -n;
        }
        return [axis[0] / n * theta, axis[1] / n * theta, axis[2] / n * theta];
    }
    let s = theta / (T::lit(2.0) * theta.sin());
    [v[0] * s, v[1] * s, v[2] * s]
}

/// Angle of `a * bᵀ`, the geodesic distance between two rotations.
pub fn rotation_angle_between<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> T {
    let m = mat_mul(a, &transpose(b));
    let cos = ((m[0][0] + m[1][1] + m[2][2] - T::one()) * T::lit(0.5))
        .max(-T::one())
        .min(T::one());
    cos.acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let phi = [0.3, -0.2, 0.25];
        let pi: Vec<Interval<f64>> = phi.iter().map(|&v| Interval::point(v)).collect();
        let d = rotation_derivatives(&pi).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            let (mut lo, mut hi) = (phi, phi);
            lo[i] -= h;
            hi[i] += h;
            let (rl, rh) = (rotation::<f64, f64>(&lo), rotation::<f64, f64>(&hi));
            for r in 0..3 {
                for c in 0..3 {
                    let fd = (rh[r][c] - rl[r][c]) / (2.0 * h);
                    let e = d[i][r][c];
                    assert!(e.lo - 1e-8 <= fd && fd <= e.hi + 1e-8, "{i} {r} {c}: {fd} vs {e:?}");
                }
            }
        }
        let big = [Interval::new(1.2, 1.4), Interval::point(0.0), Interval::point(0.0)];
        assert!(rotation_derivatives(&big).is_none());
    }

    #[test]
    fn zero_vector_is_identity() {
        let r = rotation::<f64, f64>(&[0.0, 0.0, 0.0]);
        assert_eq!(r, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = rotation::<f64, f64>(&[0.0, 0.0, std::f64::consts::FRAC_PI_2]);
        let v = mat_vec(&r, &[1.0, 0.0, 0.0]);
        approx::assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn log_inverts_exp(a in -1.8f64..1.8, b in -1.8f64..1.8, c in -1.8f64..1.8) {
            prop_assume!((a * a + b * b + c * c).sqrt() < 3.1);
            let r = rotation::<f64, f64>(&[a, b, c]);
            let p = rotation_log(&r);
            prop_assert!((p[0] - a).abs() < 1e-7 && (p[1] - b).abs() < 1e-7 && (p[2] - c).abs() < 1e-7);
        }

        #[test]
        fn derivative_enclosure_contains_samples(a in -0.6f64..0.6, b in -0.6f64..0.6, c in -0.6f64..0.6,
                                                 w in 0.0f64..0.3, s in prop::array::uniform3(0.0f64..1.0)) {
            let bx = [Interval::new(a, a + w), Interval::new(b, b + w), Interval::new(c, c + w)];
            let d = rotation_derivatives(&bx).unwrap();
            let p = [a + s[0] * w, b + s[1] * w, c + s[2] * w];
            let h = 1e-6;
            for i in 0..3 {
                let (mut lo, mut hi) = (p, p);
                lo[i] -= h;
                hi[i] += h;
                let (rl, rh) = (rotation::<f64, f64>(&lo), rotation::<f64, f64>(&hi));
                for r in 0..3 {
                    for col in 0..3 {
                        let fd = (rh[r][col] - rl[r][col]) / (2.0 * h);
                        prop_assert!(d[i][r][col].lo - 1e-7 <= fd && fd <= d[i][r][col].hi + 1e-7);
                    }
                }
            }
        }

        #[test]
        fn interval_rotation_encloses_samples(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
                                              w in 0.0f64..0.8, s in 0.0f64..1.0) {
            let bx = [Interval::new(a, a + w), Interval::new(b, b + w), Interval::new(c, c + w)];
            let ri = rotation::<f64, Interval<f64>>(&bx);
            let rp = rotation::<f64, f64>(&[a + s * w, b + s * w, c + s * w]);
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert!(ri[i][j].lo - 1e-12 <= rp[i][j] && rp[i][j] <= ri[i][j].hi + 1e-12);
                }
            }
        }
    }
}
