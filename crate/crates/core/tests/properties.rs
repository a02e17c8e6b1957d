use ivote_core::datagen::{
    gen_alignment_instance, gen_hyperplane_instance, gen_line_instance, gen_pose_instance,
    gen_ray_instance, AlignmentBracket, ProblemInstance,
};
use ivote_core::surface::{Family, Model};
use ivote_core::voting::{
    canonize_with_report, generalized_vote, intersects_box, naive_vote, GvConfig, Tolerance,
};
use ivote_core::{with_model, AaBox, ModelTag, ParametricSurface};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(kind: usize, seed: u64) -> ProblemInstance<f64> {
    match kind {
        0 => gen_line_instance(20, 0.5, 0.001, seed).unwrap(),
        1 => gen_hyperplane_instance(3, 20, 0.5, 0.001, seed).unwrap(),
        2 => gen_ray_instance(20, 8, seed).unwrap(),
        3 => gen_alignment_instance(20, 0.5, AlignmentBracket::default(), seed).unwrap(),
        4 => gen_pose_instance(ModelTag::Pose5, 10, 2, 0.5, 0.1, seed).unwrap(),
        5 => gen_pose_instance(ModelTag::Pose6, 10, 2, 0.5, 0.1, seed).unwrap(),
        6 => gen_pose_instance(ModelTag::Pose7, 10, 2, 0.5, 0.1, seed).unwrap(),
        _ => gen_pose_instance(ModelTag::Radial5, 10, 2, 0.5, 0.1, seed).unwrap(),
    }
}

fn random_box(rng: &mut ChaCha8Rng, d: usize, max_side: f64) -> AaBox<f64> {
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        let side = rng.random_range(0.01..max_side);
        lo[i] = rng.random_range(0.0..1.0 - side);
        hi[i] = lo[i] + side;
    }
    AaBox::new(&lo, &hi).unwrap()
}

fn sample_in(rng: &mut ChaCha8Rng, bx: &AaBox<f64>) -> Vec<f64> {
    (0..bx.dim()).map(|i| rng.random_range(bx.min[i]..=bx.max[i])).collect()
}

fn eval<F: Family<f64>>(m: &Model<f64, F>, p: &[f64], t: &[f64], free: &[f64]) -> Option<Vec<f64>> {
    let prep = m.prepare_point(p);
    let mut out = vec![0.0; free.len()];
    m.eval_with(&prep, t, free, &mut out).ok()?;
    Some(out)
}

/// True when `s` passes through `bx` at one of the sampled free coordinates.
fn hit_by_sampling<F: Family<f64>>(
    m: &Model<f64, F>,
    s: &ParametricSurface<f64>,
    bx: &AaBox<f64>,
    rng: &mut ChaCha8Rng,
) -> bool {
    (0..200).any(|_| {
        let p = sample_in(rng, bx);
        match m.eval_at(&p, s) {
            Ok(v) => m
                .dep_axes()
                .iter()
                .zip(&v)
                .all(|(&a, &y)| y >= bx.min[a] && y <= bx.max[a]),
            Err(_) => false,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_parameters_are_additive(kind in 0usize..8, seed in 0u64..1000, shift in -0.5f64..0.5) {
        let inst = instance(kind, seed);
        let any = inst.model().unwrap();
        let surfaces = inst.surfaces(&any).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        with_model!(&any, m => {
            let s = &surfaces[rng.random_range(0..surfaces.len())];
            let p = sample_in(&mut rng, &AaBox::unit(m.dims().d));
            let zero = vec![0.0; s.free.len()];
            let shifted: Vec<f64> = s.free.iter().map(|f| f + shift).collect();
            if let (Some(a), Some(b)) = (eval(m, &p, &s.essentials, &zero), eval(m, &p, &s.essentials, &shifted)) {
                for j in 0..a.len() {
                    prop_assert!((b[j] - a[j] - (shifted[j])).abs() <= 1e-9 * (1.0 + a[j].abs()));
                }
            }
        });
    }

    #[test]
    fn box_test_never_misses(kind in 0usize..8, seed in 0u64..1000) {
        let inst = instance(kind, seed);
        let any = inst.model().unwrap();
        let surfaces = inst.surfaces(&any).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        with_model!(&any, m => {
            let d = m.dims().d;
            for s in &surfaces {
                let bx = random_box(&mut rng, d, 0.3);
                let slack = vec![0.0; s.free.len()];
                if hit_by_sampling(m, s, &bx, &mut rng) {
                    prop_assert!(intersects_box(m, s, &bx, &slack));
                }
            }
        });
    }

    #[test]
    fn canonical_surfaces_stay_close(kind in 0usize..8, seed in 0u64..1000) {
        let inst = instance(kind, seed);
        let any = inst.model().unwrap();
        let surfaces = inst.surfaces(&any).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xca11);
        with_model!(&any, m => {
            let d = m.dims().d;
            let bx = random_box(&mut rng, d, 0.25);
            let tol = Tolerance::uniform(d, 0.02).unwrap();
            let (canon, rep) = canonize_with_report(m, &surfaces, &bx, &tol).unwrap();
            for (i, s) in surfaces.iter().enumerate() {
                let c = &canon[rep.assignment[i]];
                for _ in 0..20 {
                    let p = sample_in(&mut rng, &bx);
                    if let (Ok(a), Ok(b)) = (m.eval_at(&p, s), m.eval_at(&p, c)) {
                        for j in 0..a.len() {
                            prop_assert!((a[j] - b[j]).abs() <= rep.drift[j] * (1.0 + 1e-9) + 1e-12);
                        }
                    }
                }
            }
        });
    }

    #[test]
    fn voting_dominates_grid_and_ignores_threads(seed in 0u64..1000, frac in 0.0f64..0.6) {
        let inst = gen_line_instance(60, frac, 0.003, seed).unwrap();
        let any = inst.model().unwrap();
        let surfaces = inst.surfaces(&any).unwrap();
        let tol = Tolerance::uniform(2, 1.0 / 64.0).unwrap();
        with_model!(&any, m => {
            let bx = AaBox::unit(2);
            let naive = naive_vote(m, &surfaces, &bx, &tol).unwrap();
            let cfg = GvConfig { parallel_depth: 2, ..GvConfig::default() };
            let run = |threads| rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| generalized_vote(m, &surfaces, &bx, &tol, &cfg).unwrap());
            let one = run(1);
            prop_assert!(one.count >= naive.count);
            prop_assert_eq!(one, run(3));
        });
    }
}
