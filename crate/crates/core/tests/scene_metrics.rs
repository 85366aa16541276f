use epigeom::geometry::{compose_fundamental, epipolar_residual, CameraIntrinsics, FMat, HomoPoint, RelativePose, Vec3};
use epigeom::metrics::{
    epi_abs, epi_sqr, fmat_distance, high_confidence_indices, select_high_confidence, symmetric_epipolar_distance,
    MetricReport,
};
use epigeom::scene::{fundamental_from_projections, generate_scene, perturb, SceneConfig};
use proptest::prelude::*;

#[test]
fn symmetric_distance_of_a_one_pixel_offset() {
    // sideways motion: epipolar lines are the image rows in both views
    let k = CameraIntrinsics::new(500.0, 320.0, 240.0).unwrap();
    let f = compose_fundamental(&k, &k, &RelativePose::new(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros())).unwrap();
    let p = HomoPoint::from_pixel(100.0, 200.0);
    let on_line = HomoPoint::from_pixel(40.0, 200.0);
    assert!(symmetric_epipolar_distance(&f, &p, &on_line).unwrap() < 1e-20);
    let off = HomoPoint::from_pixel(40.0, 201.0);
    // one pixel in each image, squared and summed
    let d = symmetric_epipolar_distance(&f, &p, &off).unwrap();
    assert!((d - 2.0).abs() < 1e-9, "{d}");
    assert!((symmetric_epipolar_distance(&f.scaled(-3.0), &p, &off).unwrap() - d).abs() < 1e-9);
}

#[test]
fn exact_scene_satisfies_its_geometry() {
    for seed in 0..20 {
        let cfg = SceneConfig { seed, ..Default::default() };
        let s = generate_scene(&cfg).unwrap();
        assert_eq!(s.corrs_exact.len(), cfg.n_points);
        let unit = s.f_gt.scaled(1.0 / s.f_gt.frobenius_norm());
        for (p, q) in s.corrs_exact.iter() {
            assert!(epipolar_residual(&unit, p, q).abs() < 1e-10);
            for pt in [p, q] {
                let (x, y) = (pt.x / pt.w, pt.y / pt.w);
                assert!((0.0..=640.0).contains(&x) && (0.0..=480.0).contains(&y));
            }
        }
        assert_eq!(high_confidence_indices(&s.corrs_exact, &s.f_gt, 2.0).len(), cfg.n_points);
    }
}

#[test]
fn scenes_are_seed_deterministic() {
    let cfg = SceneConfig { seed: 11, noise_sigma: 0.5, outlier_fraction: 0.2, ..Default::default() };
    let a = generate_scene(&cfg).unwrap();
    let b = generate_scene(&cfg).unwrap();
    assert_eq!(a.corrs_noisy, b.corrs_noisy);
    assert_eq!(a.f_gt, b.f_gt);
    let c = generate_scene(&SceneConfig { seed: 12, ..cfg }).unwrap();
    assert_ne!(a.f_gt, c.f_gt);
}

#[test]
fn both_constructions_agree() {
    for seed in 0..20 {
        let s = generate_scene(&SceneConfig { seed, ..Default::default() }).unwrap();
        let (p1, p2) = s.projection_matrices();
        let f = fundamental_from_projections(&p1, &p2).unwrap();
        let composed = compose_fundamental(&s.cam1.0, &s.cam2.0, &s.cam2.1).unwrap();
        assert!(fmat_distance(&f, &composed).unwrap() < 1e-9);
    }
}

#[test]
fn selection_drops_outliers() {
    let s = generate_scene(&SceneConfig { seed: 3, outlier_fraction: 0.3, ..Default::default() }).unwrap();
    let labels = s.corrs_noisy.labels().unwrap();
    let keep = high_confidence_indices(&s.corrs_noisy, &s.f_gt, 2.0);
    for (i, &l) in labels.iter().enumerate() {
        if l {
            assert!(keep.contains(&i));
        }
    }
    assert!(keep.len() < s.corrs_noisy.len());
    let sel = select_high_confidence(&s.corrs_noisy, &s.f_gt, 2.0).unwrap();
    assert_eq!(sel.len(), keep.len());
}

#[test]
fn truth_scores_zero_on_exact_data() {
    let s = generate_scene(&SceneConfig { seed: 9, ..Default::default() }).unwrap();
    let r = MetricReport::compute(&s.f_gt, &s.corrs_exact, true);
    assert!(r.epi_abs < 1e-9 * r.n_points as f64);
    assert!(r.epi_sqr < 1e-9 * r.n_points as f64);
    assert_eq!(r.per_point.as_ref().map(Vec::len), Some(60));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_scale_with_the_matrix(seed in 0u64..500, s in 0.1f64..10.0) {
        let scene = generate_scene(&SceneConfig { seed, noise_sigma: 1.0, ..Default::default() }).unwrap();
        let f: FMat = scene.f_gt;
        let c = &scene.corrs_noisy;
        prop_assert!((epi_abs(&f.scaled(s), c) - s * epi_abs(&f, c)).abs() <= 1e-9 * s * epi_abs(&f, c));
        prop_assert!((epi_sqr(&f.scaled(s), c) - s * s * epi_sqr(&f, c)).abs() <= 1e-9 * s * s * epi_sqr(&f, c));
    }

    #[test]
    fn perturbation_keeps_labels_and_count(seed in 0u64..500, frac in 0.0f64..0.6) {
        let scene = generate_scene(&SceneConfig { seed, ..Default::default() }).unwrap();
        let noisy = perturb(&scene.corrs_exact, 0.5, frac, [640.0, 480.0], seed).unwrap();
        let labels = noisy.labels().unwrap();
        prop_assert_eq!(labels.len(), 60);
        prop_assert_eq!(labels.iter().filter(|l| !**l).count(), (frac * 60.0).floor() as usize);
    }
}
