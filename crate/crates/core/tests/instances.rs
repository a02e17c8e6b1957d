use ivote_core::datagen::{
    gen_alignment_instance, gen_correspondence_free_instance, gen_hyperplane_instance,
    gen_line_instance, gen_pose_instance, gen_ray_instance, load_instance, parse_instance,
    save_instance, AlignmentBracket, Items, ProblemInstance,
};
use ivote_core::surfaces::line::line_surface_from_point;
use ivote_core::surfaces::AnyModel;
use ivote_core::voting::{generalized_vote, naive_vote, GvConfig, Tolerance};
use ivote_core::{AaBox, Error, ModelTag, SpaceMap};

fn all_kinds() -> Vec<ProblemInstance<f64>> {
    let mut v = vec![
        gen_line_instance(50, 0.2, 0.001, 1).unwrap(),
        gen_hyperplane_instance(4, 30, 0.3, 0.001, 2).unwrap(),
        gen_ray_instance(20, 5, 3).unwrap(),
        gen_alignment_instance(25, 0.4, AlignmentBracket::default(), 4).unwrap(),
        gen_correspondence_free_instance(ModelTag::Pose6, 6, 5, 0.5, 0.1, 5).unwrap(),
    ];
    for tag in [ModelTag::Pose5, ModelTag::Pose6, ModelTag::Pose7, ModelTag::Radial5] {
        v.push(gen_pose_instance(tag, 10, 3, 0.5, 0.2, 6).unwrap());
    }
    v
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (i, inst) in all_kinds().into_iter().enumerate() {
        let path = dir.path().join(format!("{i}.ivote"));
        save_instance(&inst, &path).unwrap();
        let back: ProblemInstance<f64> = load_instance(&path).unwrap();
        assert_eq!(back, inst, "{}", inst.model_tag);
    }
}

#[test]
fn hand_written_votes_like_programmatic() {
    let text = "IVOTE v1 line2 d=2\n\
                # points on y = x / 2 + 1 / 4\n\
                MAP 0 1 0 1\n\
                META noise=0 seed=0\n\
                N 3\n\
                P 0.1 0.3\n\
                P 0.5 0.5\n\
                P 0.9 0.7\n";
    let inst: ProblemInstance<f64> = parse_instance(text).unwrap();
    let any = inst.model().unwrap();
    let loaded = inst.surfaces(&any).unwrap();
    let AnyModel::Line2(m) = &any else { panic!() };
    let built: Vec<_> = [[0.1, 0.3], [0.5, 0.5], [0.9, 0.7]]
        .iter()
        .enumerate()
        .map(|(i, &p)| line_surface_from_point(m, p, i as u32))
        .collect();
    let tol = Tolerance::uniform(2, 1.0 / 64.0).unwrap();
    let bx = AaBox::unit(2);
    assert_eq!(naive_vote(m, &loaded, &bx, &tol).unwrap(), naive_vote(m, &built, &bx, &tol).unwrap());
    let cfg = GvConfig::default();
    let a = generalized_vote(m, &loaded, &bx, &tol, &cfg).unwrap();
    assert_eq!(a, generalized_vote(m, &built, &bx, &tol, &cfg).unwrap());
    assert_eq!(a.count, 3);
}

#[test]
fn truncated_file_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.ivote");
    let text = ivote_core::datagen::write_instance(&gen_line_instance(5, 0.4, 0.0, 9).unwrap());
    let keep: Vec<&str> = text.lines().take(6).collect();
    std::fs::write(&path, keep.join("\n")).unwrap();
    match load_instance::<f64>(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
        other => panic!("{other:?}"),
    }
}

#[test]
fn planted_inliers_fit_within_three_sigma() {
    let sigma = 0.002;
    let inst = gen_line_instance(2000, 0.5, sigma, 12).unwrap();
    let gt = inst.ground_truth.as_ref().unwrap();
    let (a, b) = (gt.params[0], gt.params[1]);
    let Items::Points(p) = &inst.items else { panic!() };
    let good = gt
        .inlier_ids
        .iter()
        .filter(|&&i| (p[i as usize][1] - a * p[i as usize][0] - b).abs() <= 3.0 * sigma)
        .count();
    assert!(good as f64 >= 0.99 * gt.inlier_ids.len() as f64);
}

#[test]
fn zero_decoys_report_every_item() {
    let inst = gen_ray_instance(12, 12, 21).unwrap();
    let any = inst.model().unwrap();
    let AnyModel::Ray3(m) = &any else { panic!() };
    let s = inst.surfaces(&any).unwrap();
    let r = naive_vote(m, &s, &AaBox::unit(3), &Tolerance::uniform(3, 0.02).unwrap()).unwrap();
    assert_eq!(r.inlier_ids, (0..12).collect::<Vec<u32>>());
}

#[test]
fn identity_alignment_is_found() {
    let inst = gen_alignment_instance(40, 1.0, AlignmentBracket::identity(), 3).unwrap();
    let any = inst.model().unwrap();
    let AnyModel::Sim2(m) = &any else { panic!() };
    let s = inst.surfaces(&any).unwrap();
    let tol = Tolerance::uniform(4, 1.0 / 32.0).unwrap();
    let r = generalized_vote(m, &s, &AaBox::unit(4), &tol, &GvConfig::default()).unwrap();
    let phys = inst.space_map.point_from_unit(&r.point);
    for (i, (v, want)) in phys.iter().zip([1.0, 0.0, 0.0, 0.0]).enumerate() {
        let e = tol.eps[i] * inst.space_map.scale(i);
        assert!((v - want).abs() <= 1.5 * e, "axis {i}: {v}");
    }
}

#[test]
fn unknown_map_dimension_fails() {
    assert!(AnyModel::<f64>::new(ModelTag::Ray3, SpaceMap::identity(2)).is_err());
}
