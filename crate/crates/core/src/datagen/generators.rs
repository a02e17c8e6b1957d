use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{GroundTruth, Items, ProblemInstance};
use crate::error::{Error, Result};
use crate::surface::{ModelTag, SpaceMap};
use crate::surfaces::rotation::{dot, mat_vec, transpose, Mat3};
use crate::surfaces::{Correspondence, PoseHypothesis, Ray3, SimilarityParams};

/// Half width of the normalized image in pose scenes.
const IMAGE_HALF_WIDTH: f64 = 0.5;
/// Horizontal distance of scene points from a gravity camera, meters.
const DEPTH_RANGE: (f64, f64) = (5.0, 40.0);
/// Projective scenes put the world origin on the optical axis at depth
/// `t_z` and scatter points within this depth of it.
const DEPTH_SPREAD: f64 = 8.0;
/// Range of `t_z` in projective voting spaces; it keeps the camera in front
/// of the point cloud.
const STREET_Z: (f64, f64) = (10.0, 60.0);
/// Rotation domain per angle-axis component; the planted rotation stays
/// within `PHI_TRUTH`.
const PHI_DOMAIN: f64 = 0.35;
const PHI_TRUTH: f64 = 0.2;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn planted_count(n: usize, fraction: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "inlier fraction {fraction} outside [0, 1]"
        )));
    }
    Ok(((n as f64) * fraction).round() as usize)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise sigma {sigma} must be finite and >= 0")));
    }
    Ok(())
}

fn normal(sigma: f64) -> Normal<f64> {
    // sigma was validated; a zero sigma is a point mass.
    Normal::new(0.0, sigma).expect("valid sigma")
}

/// Shuffles tagged items into place and returns them with the sorted ids of
/// the planted ones.
fn shuffle_tagged<I>(mut tagged: Vec<(I, bool)>, rng: &mut ChaCha8Rng) -> (Vec<I>, Vec<u32>) {
    tagged.shuffle(rng);
    let ids = tagged
        .iter()
        .enumerate()
        .filter(|(_, (_, inl))| *inl)
        .map(|(i, _)| i as u32)
        .collect();
    (tagged.into_iter().map(|(it, _)| it).collect(), ids)
}

fn instance(
    model_tag: ModelTag,
    items: Items<f64>,
    params: Vec<f64>,
    inlier_ids: Vec<u32>,
    noise_sigma: f64,
    seed: u64,
    space_map: SpaceMap<f64>,
    f0: Option<f64>,
) -> ProblemInstance<f64> {
    ProblemInstance {
        model_tag,
        items,
        ground_truth: Some(GroundTruth { params, inlier_ids }),
        noise_sigma,
        seed,
        space_map,
        f0,
    }
}

/// Points in the unit square: `round(n·fraction)` on a random line
/// `y = a x + b` with Gaussian vertical noise, the rest uniform. The line
/// has `a ∈ [0.1, 0.9]` and `b ∈ [0.05, 0.95 - a]`, so it crosses the square.
pub fn gen_line_instance(
    n: usize,
    inlier_fraction: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<ProblemInstance<f64>> {
    let mut inst = gen_hyperplane_instance(2, n, inlier_fraction, noise_sigma, seed)?;
    inst.model_tag = ModelTag::Line2;
    Ok(inst)
}

/// Points in the unit `d`-cube with a planted hyperplane
/// `x_d = a_0 + sum a_i x_i`. Ground truth is `(a_1, .., a_{d-1}, a_0)`.
pub fn gen_hyperplane_instance(
    d: usize,
    n: usize,
    inlier_fraction: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<ProblemInstance<f64>> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("hyperplane dimension {d} < 2")));
    }
    check_sigma(noise_sigma)?;
    let n_in = planted_count(n, inlier_fraction)?;
    let mut rng = rng(seed);
    let m = d - 1;
    let hi = 0.9 / m as f64;
    let lo = 0.1f64.min(hi / 2.0);
    let coeffs: Vec<f64> = (0..m).map(|_| rng.random_range(lo..hi)).collect();
    let sum: f64 = coeffs.iter().sum();
    let a0 = rng.random_range(0.05..(0.95 - sum).max(0.05 + 1e-9));
    let noise = normal(noise_sigma);
    let mut tagged = Vec::with_capacity(n);
    for i in 0..n {
        let mut p: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let inlier = i < n_in;
        let last = if inlier {
            a0 + p.iter().zip(&coeffs).map(|(x, a)| x * a).sum::<f64>() + noise.sample(&mut rng)
        } else {
            rng.random::<f64>()
        };
        p.push(last);
        tagged.push((p, inlier));
    }
    let (points, ids) = shuffle_tagged(tagged, &mut rng);
    let mut params = coeffs;
    params.push(a0);
    Ok(instance(
        ModelTag::Hyperplane,
        Items::Points(points),
        params,
        ids,
        noise_sigma,
        seed,
        SpaceMap::identity(d),
        None,
    ))
}

fn random_slope_ray(rng: &mut ChaCha8Rng, through: [f64; 3]) -> Ray3<f64> {
    let a = rng.random_range(-1.0..1.0);
    let c = rng.random_range(-1.0..1.0);
    Ray3 {
        a,
        b: through[1] - a * through[0],
        c,
        d: through[2] - c * through[0],
    }
}

/// `n_crossing` rays through a planted point in `[0.2, 0.8]³` and
/// `n - n_crossing` rays through uniform points, all with slopes in `[-1, 1]`.
pub fn gen_ray_instance(n: usize, n_crossing: usize, seed: u64) -> Result<ProblemInstance<f64>> {
    if n_crossing > n {
        return Err(Error::InvalidParameter(format!(
            "n_crossing {n_crossing} exceeds n {n}"
        )));
    }
    let mut rng = rng(seed);
    let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.2..0.8));
    let mut tagged = Vec::with_capacity(n);
    for i in 0..n {
        let through = if i < n_crossing {
            p
        } else {
            std::array::from_fn(|_| rng.random::<f64>())
        };
        tagged.push((random_slope_ray(&mut rng, through), i < n_crossing));
    }
    let (rays, ids) = shuffle_tagged(tagged, &mut rng);
    Ok(instance(
        ModelTag::Ray3,
        Items::Rays(rays),
        p.to_vec(),
        ids,
        0.0,
        seed,
        SpaceMap::identity(3),
        None,
    ))
}

/// Range of planted similarities. Scale in `scale`, rotation angle within
/// `±max_angle`, translation components within `±max_translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentBracket {
    pub scale: (f64, f64),
    pub max_angle: f64,
    pub max_translation: f64,
}

impl AlignmentBracket {
    pub fn identity() -> Self {
        Self {
            scale: (1.0, 1.0),
            max_angle: 0.0,
            max_translation: 0.0,
        }
    }

    /// Voting box: `|a|, |b| ≤ 1.25·max(s_hi, 1)`,
    /// `|c|, |d| ≤ 1.25·max(t_max, 0.5)`.
    pub fn space_map(&self) -> SpaceMap<f64> {
        let s = 1.25 * self.scale.1.max(1.0);
        let t = 1.25 * self.max_translation.max(0.5);
        SpaceMap {
            lo: vec![-s, -s, -t, -t],
            hi: vec![s, s, t, t],
        }
    }
}

impl Default for AlignmentBracket {
    fn default() -> Self {
        Self {
            scale: (0.5, 2.0),
            max_angle: std::f64::consts::FRAC_PI_4,
            max_translation: 0.5,
        }
    }
}

/// Source points uniform in `[-1, 1]²` (at least 0.1 from the origin). Inlier
/// pairs map through the planted similarity; decoy targets are images of an
/// unrelated source point, so they share the inlier target distribution.
pub fn gen_alignment_instance(
    n: usize,
    inlier_fraction: f64,
    bracket: AlignmentBracket,
    seed: u64,
) -> Result<ProblemInstance<f64>> {
    let (s_lo, s_hi) = bracket.scale;
    if !(s_lo > 0.0 && s_lo <= s_hi && bracket.max_angle >= 0.0 && bracket.max_translation >= 0.0)
    {
        return Err(Error::InvalidParameter(format!("invalid alignment bracket {bracket:?}")));
    }
    let n_in = planted_count(n, inlier_fraction)?;
    let mut rng = rng(seed);
    let uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
        if lo < hi {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    };
    let s = uniform(&mut rng, s_lo, s_hi);
    let theta = uniform(&mut rng, -bracket.max_angle, bracket.max_angle);
    let c = uniform(&mut rng, -bracket.max_translation, bracket.max_translation);
    let d = uniform(&mut rng, -bracket.max_translation, bracket.max_translation);
    let sim = SimilarityParams::from_scale_angle(s, theta, c, d);
    let source = |rng: &mut ChaCha8Rng| loop {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if p[0] * p[0] + p[1] * p[1] >= 0.01 {
            return p;
        }
    };
    let mut tagged = Vec::with_capacity(n);
    for i in 0..n {
        let p = source(&mut rng);
        let q = if i < n_in { sim.apply(p) } else { sim.apply(source(&mut rng)) };
        tagged.push(((p, q), i < n_in));
    }
    let (pairs, ids) = shuffle_tagged(tagged, &mut rng);
    Ok(instance(
        ModelTag::Sim2,
        Items::Pairs(pairs),
        vec![sim.a, sim.b, sim.c, sim.d],
        ids,
        0.0,
        seed,
        bracket.space_map(),
        None,
    ))
}

/// Unit vector perturbed by isotropic Gaussian jitter of `sigma` radians in
/// its tangent plane.
fn jitter(b: [f64; 3], noise: &Normal<f64>, rng: &mut ChaCha8Rng) -> [f64; 3] {
    let n = dot::<f64, f64>(&b, &b).sqrt();
    let b = [b[0] / n, b[1] / n, b[2] / n];
    let helper = if b[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let cross = |a: [f64; 3], c: [f64; 3]| {
        [
            a[1] * c[2] - a[2] * c[1],
            a[2] * c[0] - a[0] * c[2],
            a[0] * c[1] - a[1] * c[0],
        ]
    };
    let u = cross(b, helper);
    let nu = dot::<f64, f64>(&u, &u).sqrt();
    let u = [u[0] / nu, u[1] / nu, u[2] / nu];
    let v = cross(b, u);
    let (g1, g2) = (noise.sample(rng), noise.sample(rng));
    std::array::from_fn(|i| b[i] + g1 * u[i] + g2 * v[i])
}

/// A planted camera and how it sees the world.
struct Scene {
    tag: ModelTag,
    pose: PoseHypothesis<f64>,
    rot: Mat3<f64>,
}

impl Scene {
    fn new(tag: ModelTag, f0: f64, rng: &mut ChaCha8Rng) -> Result<Self> {
        let focal = match tag {
            ModelTag::Pose5 | ModelTag::Pose7 => rng.random_range(0.7..1.2) * f0,
            ModelTag::Pose6 | ModelTag::Radial5 => f0,
            other => {
                return Err(Error::InvalidParameter(format!("{other} is not a pose model")))
            }
        };
        let pose = if tag == ModelTag::Pose5 {
            let center = [
                rng.random_range(-20.0..20.0),
                rng.random_range(-20.0..20.0),
                rng.random_range(1.0..4.0),
            ];
            PoseHypothesis::gravity(center, rng.random_range(-0.8..0.8), focal)
        } else {
            let phi = std::array::from_fn(|_| rng.random_range(-PHI_TRUTH..PHI_TRUTH));
            let t = [
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(15.0..35.0),
            ];
            PoseHypothesis::projective(phi, t, focal)
        };
        Ok(Self {
            tag,
            rot: pose.rotation(),
            pose,
        })
    }

    fn space_map(&self, f0: f64) -> SpaceMap<f64> {
        let (p, h) = (PHI_DOMAIN, 2.5);
        let f = (0.6 * f0, 1.3 * f0);
        let z = STREET_Z;
        let (lo, hi) = match self.tag {
            ModelTag::Pose5 => (
                vec![-25.0, -25.0, 0.0, -1.0, f.0],
                vec![25.0, 25.0, 5.0, 1.0, f.1],
            ),
            ModelTag::Pose6 => (vec![-h, -h, z.0, -p, -p, -p], vec![h, h, z.1, p, p, p]),
            ModelTag::Pose7 => (
                vec![-h, -h, z.0, -p, -p, -p, f.0],
                vec![h, h, z.1, p, p, p, f.1],
            ),
            _ => (vec![-h, -h, -p, -p, -p], vec![h, h, p, p, p]),
        };
        SpaceMap { lo, hi }
    }

    fn random_image(rng: &mut ChaCha8Rng) -> (f64, f64) {
        let w = IMAGE_HALF_WIDTH;
        (rng.random_range(-w..w), rng.random_range(-w..w))
    }

    /// A world point seen at a uniform image location and depth.
    fn random_point(&self, rng: &mut ChaCha8Rng) -> [f64; 3] {
        let (xi, eta) = Self::random_image(rng);
        let f = self.pose.focal;
        if self.tag == ModelTag::Pose5 {
            let depth = rng.random_range(DEPTH_RANGE.0..DEPTH_RANGE.1);
            let az = self.pose.kappa.atan() + (xi * f).atan();
            let c = self.pose.position;
            [
                c[0] + depth * az.cos(),
                c[1] + depth * az.sin(),
                c[2] + depth * eta * f,
            ]
        } else {
            let t = self.pose.position;
            let depth = t[2] + rng.random_range(-DEPTH_SPREAD..DEPTH_SPREAD);
            let cam = [depth * xi / f - t[0], depth * eta / f - t[1], depth - t[2]];
            mat_vec(&transpose(&self.rot), &cam)
        }
    }

    /// Noisy observation of `w`.
    fn observe(&self, w: [f64; 3], noise: &Normal<f64>, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let f = self.pose.focal;
        if self.tag == ModelTag::Pose5 {
            let c = self.pose.position;
            let d = jitter([w[0] - c[0], w[1] - c[1], w[2] - c[2]], noise, rng);
            let az = d[1].atan2(d[0]);
            let el = d[2].atan2(d[0].hypot(d[1]));
            ((az - self.pose.kappa.atan()).tan() / f, el.tan() / f)
        } else {
            let t = self.pose.position;
            let r = &self.rot;
            let cam = [
                dot::<f64, f64>(&r[0], &w) + t[0],
                dot::<f64, f64>(&r[1], &w) + t[1],
                dot::<f64, f64>(&r[2], &w) + t[2],
            ];
            let b = jitter(cam, noise, rng);
            (f * b[0] / b[2], f * b[1] / b[2])
        }
    }

    fn truth(&self) -> Vec<f64> {
        self.pose.to_point(self.tag).expect("pose tag")
    }
}

fn pose_noise(noise_sigma_deg: f64) -> Result<(f64, Normal<f64>)> {
    check_sigma(noise_sigma_deg)?;
    let sigma = noise_sigma_deg.to_radians();
    Ok((sigma, normal(sigma)))
}

/// A scene of `n_points` points seen by a planted camera. Each point yields
/// one image feature: `round(fraction·n_points)` features are noisy
/// observations of their point, the rest are uniform on the image. Every
/// feature is matched to `n_matches_per_point` candidate points; a true
/// feature's candidates include its own point and the other candidates are
/// uniform over the point set. The ground truth lists the true matches.
///
/// `noise_sigma` of the result is in radians.
pub fn gen_pose_instance(
    model_tag: ModelTag,
    n_points: usize,
    n_matches_per_point: usize,
    inlier_fraction: f64,
    noise_sigma_deg: f64,
    seed: u64,
) -> Result<ProblemInstance<f64>> {
    if n_points > 0 && !(1..=n_points).contains(&n_matches_per_point) {
        return Err(Error::InvalidParameter(format!(
            "n_matches_per_point {n_matches_per_point} must be in 1..={n_points}"
        )));
    }
    let (sigma, noise) = pose_noise(noise_sigma_deg)?;
    let n_true = planted_count(n_points, inlier_fraction)?;
    let f0 = 1.0;
    let mut rng = rng(seed);
    let scene = Scene::new(model_tag, f0, &mut rng)?;
    let points: Vec<[f64; 3]> = (0..n_points).map(|_| scene.random_point(&mut rng)).collect();
    let mut tagged = Vec::with_capacity(n_points * n_matches_per_point);
    for (i, &w) in points.iter().enumerate() {
        let truthful = i < n_true;
        let (xi, eta) = if truthful {
            scene.observe(w, &noise, &mut rng)
        } else {
            Scene::random_image(&mut rng)
        };
        let mut cands = Vec::with_capacity(n_matches_per_point);
        if truthful {
            cands.push(i);
            let others = index::sample(&mut rng, n_points - 1, n_matches_per_point - 1);
            cands.extend(others.iter().map(|j| if j >= i { j + 1 } else { j }));
        } else {
            cands.extend(index::sample(&mut rng, n_points, n_matches_per_point).iter());
        }
        for j in cands {
            tagged.push((Correspondence::new(points[j], xi, eta), truthful && j == i));
        }
    }
    let (matches, ids) = shuffle_tagged(tagged, &mut rng);
    Ok(instance(
        model_tag,
        Items::Correspondences(matches),
        scene.truth(),
        ids,
        sigma,
        seed,
        scene.space_map(f0),
        Some(f0),
    ))
}

/// Correspondence-free posing: `n_points` scene points and `n_bearings`
/// image features, of which `round(fraction·n_bearings)` observe distinct
/// scene points and the rest are uniform on the image. Items are all
/// point-feature pairs; pair `(i, j)` has id `i·n_bearings + j`.
pub fn gen_correspondence_free_instance(
    model_tag: ModelTag,
    n_points: usize,
    n_bearings: usize,
    inlier_fraction: f64,
    noise_sigma_deg: f64,
    seed: u64,
) -> Result<ProblemInstance<f64>> {
    let (sigma, noise) = pose_noise(noise_sigma_deg)?;
    let n_true = planted_count(n_bearings, inlier_fraction)?;
    if n_true > n_points {
        return Err(Error::InvalidParameter(format!(
            "{n_true} observed points requested from {n_points}"
        )));
    }
    let f0 = 1.0;
    let mut rng = rng(seed);
    let scene = Scene::new(model_tag, f0, &mut rng)?;
    let points: Vec<[f64; 3]> = (0..n_points).map(|_| scene.random_point(&mut rng)).collect();
    let observed = index::sample(&mut rng, n_points, n_true).into_vec();
    let mut bearings = Vec::with_capacity(n_bearings);
    let mut source = vec![None; n_bearings];
    for j in 0..n_bearings {
        if j < n_true {
            bearings.push(scene.observe(points[observed[j]], &noise, &mut rng));
            source[j] = Some(observed[j]);
        } else {
            bearings.push(Scene::random_image(&mut rng));
        }
    }
    let mut order: Vec<usize> = (0..n_bearings).collect();
    order.shuffle(&mut rng);
    let bearings: Vec<_> = order.iter().map(|&j| bearings[j]).collect();
    let source: Vec<_> = order.iter().map(|&j| source[j]).collect();
    let mut pairs = Vec::with_capacity(n_points * n_bearings);
    for &w in &points {
        for &(xi, eta) in &bearings {
            pairs.push(Correspondence::new(w, xi, eta));
        }
    }
    let mut ids: Vec<u32> = source
        .iter()
        .enumerate()
        .filter_map(|(j, s)| s.map(|i| (i * n_bearings + j) as u32))
        .collect();
    ids.sort_unstable();
    Ok(instance(
        model_tag,
        Items::Correspondences(pairs),
        scene.truth(),
        ids,
        sigma,
        seed,
        scene.space_map(f0),
        Some(f0),
    ))
}
