use ivote_core::baselines::branch_and_bound;
use ivote_core::datagen::{
    brute_force_vote, gen_hyperplane_instance, gen_line_instance, gen_ray_instance, ProblemInstance,
};
use ivote_core::voting::{generalized_vote, naive_vote, GvConfig, Tolerance};
use ivote_core::{with_model, AaBox};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check(inst: &ProblemInstance<f64>, tol: &Tolerance<f64>) {
    let any = inst.model().unwrap();
    let surfaces = inst.surfaces(&any).unwrap();
    with_model!(&any, m => {
        let bx = AaBox::unit(m.dims().d);
        let naive = naive_vote(m, &surfaces, &bx, tol).unwrap();
        let brute = brute_force_vote(m, &surfaces, &bx, tol).unwrap();
        assert_eq!(naive.count, brute.count, "seed {}", inst.seed);
        assert_eq!(naive.point, brute.point, "seed {}", inst.seed);
        assert_eq!(naive.inlier_ids, brute.inlier_ids, "seed {}", inst.seed);
        let gv = generalized_vote(m, &surfaces, &bx, tol, &GvConfig::default()).unwrap();
        assert!(gv.count >= naive.count, "gv {} < naive {} (seed {})", gv.count, naive.count, inst.seed);
        let bnb = branch_and_bound(m, &surfaces, &bx, tol).unwrap();
        assert!(bnb.count >= naive.count, "seed {}", inst.seed);
    });
}

fn eps(rng: &mut ChaCha8Rng, choices: &[f64]) -> f64 {
    choices[rng.random_range(0..choices.len())]
}

#[test]
fn lines_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for seed in 0..20 {
        let n = rng.random_range(1..=200);
        let frac = rng.random_range(0.0..0.5);
        let inst = gen_line_instance(n, frac, 0.002, seed).unwrap();
        let e = eps(&mut rng, &[1.0 / 32.0, 0.02, 1.0 / 64.0, 0.01]);
        check(&inst, &Tolerance::uniform(2, e).unwrap());
    }
}

#[test]
fn planes_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for seed in 0..10 {
        let n = rng.random_range(1..=200);
        let frac = rng.random_range(0.0..0.5);
        let inst = gen_hyperplane_instance(3, n, frac, 0.002, seed).unwrap();
        let e = eps(&mut rng, &[0.125, 1.0 / 16.0, 0.05]);
        check(&inst, &Tolerance::uniform(3, e).unwrap());
    }
}

#[test]
fn rays_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for seed in 0..10 {
        let n = rng.random_range(1..=200);
        let k = rng.random_range(0..=n.min(20));
        let inst = gen_ray_instance(n, k, seed).unwrap();
        let e = eps(&mut rng, &[0.125, 1.0 / 16.0, 0.04]);
        check(&inst, &Tolerance::new(vec![e, e, 0.5 * e], 1.0).unwrap());
    }
}

#[test]
fn noiseless_line_at_fine_tolerance() {
    let inst = gen_line_instance(100, 0.04, 0.0, 7).unwrap();
    let any = inst.model().unwrap();
    let s = inst.surfaces(&any).unwrap();
    with_model!(&any, m => {
        let r = naive_vote(m, &s, &AaBox::unit(2), &Tolerance::uniform(2, 0.002).unwrap()).unwrap();
        assert!(r.count >= 4);
    });
}
