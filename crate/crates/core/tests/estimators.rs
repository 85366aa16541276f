use epigeom::error::Error;
use epigeom::estimators::{
    algebraic_minimization, eight_point, hartley_normalize, lemeds, normalized_eight_point, ransac, seven_point,
    RobustConfig,
};
use epigeom::geometry::{CorrSet, HomoPoint};
use epigeom::metrics::fmat_distance;
use epigeom::scene::{generate_scene, SceneConfig, SyntheticScene};
use proptest::prelude::*;

fn scene(seed: u64, sigma: f64, outliers: f64) -> SyntheticScene {
    generate_scene(&SceneConfig { seed, noise_sigma: sigma, outlier_fraction: outliers, ..Default::default() })
        .unwrap()
}

#[test]
fn linear_estimators_recover_exact_geometry() {
    for seed in 0..10 {
        let s = scene(seed, 0.0, 0.0);
        for f in [eight_point(&s.corrs_exact).unwrap(), normalized_eight_point(&s.corrs_exact).unwrap()] {
            assert!(fmat_distance(&f, &s.f_gt).unwrap() < 1e-6);
            assert!(f.is_rank2());
        }
    }
}

#[test]
fn seven_point_contains_the_truth() {
    for seed in 0..10 {
        let s = scene(seed, 0.0, 0.0);
        let sub = s.corrs_exact.subset(&[0, 5, 11, 17, 23, 31, 42]).unwrap();
        let roots = seven_point(&sub).unwrap();
        assert!((1..=3).contains(&roots.len()));
        let best = roots.iter().map(|f| fmat_distance(f, &s.f_gt).unwrap()).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-6, "seed {seed}: best root at {best:e}");
        for f in &roots {
            assert!(f.is_rank2());
        }
    }
}

#[test]
fn seven_point_needs_seven() {
    let s = scene(1, 0.0, 0.0);
    let sub = s.corrs_exact.subset(&[0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
    assert!(matches!(seven_point(&sub), Err(Error::WrongSampleSize(8))));
}

#[test]
fn too_few_correspondences() {
    let s = scene(2, 0.0, 0.0);
    let sub = s.corrs_exact.subset(&[0, 1, 2, 3, 4]).unwrap();
    for r in [eight_point(&sub), normalized_eight_point(&sub)] {
        assert!(matches!(r, Err(Error::InsufficientCorrespondences { needed: 8, got: 5 })));
    }
    assert!(matches!(ransac(&sub, &RobustConfig::default()), Err(Error::InsufficientCorrespondences { .. })));
}

#[test]
fn robust_estimators_are_seed_deterministic() {
    let s = scene(3, 0.5, 0.3);
    let a = ransac(&s.corrs_noisy, &RobustConfig::with_seed(7)).unwrap();
    let b = ransac(&s.corrs_noisy, &RobustConfig::with_seed(7)).unwrap();
    assert_eq!(a, b);
    let a = lemeds(&s.corrs_noisy, &RobustConfig::with_seed(7)).unwrap();
    let b = lemeds(&s.corrs_noisy, &RobustConfig::with_seed(7)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn robust_estimators_separate_outliers() {
    let s = scene(4, 0.0, 0.3);
    let labels = s.corrs_noisy.labels().unwrap().to_vec();
    let fit = ransac(&s.corrs_noisy, &RobustConfig::with_seed(1)).unwrap();
    assert!(fmat_distance(&fit.f, &s.f_gt).unwrap() < 1e-6);
    // every true inlier is kept; an outlier may land on its epipolar line by chance
    for (i, &l) in labels.iter().enumerate() {
        if l {
            assert!(fit.inliers[i]);
        }
    }
    let fit = lemeds(&s.corrs_noisy, &RobustConfig::with_seed(1)).unwrap();
    assert!(fmat_distance(&fit.f, &s.f_gt).unwrap() < 1e-6);
}

#[test]
fn algebraic_minimization_descends() {
    for seed in 0..10 {
        let s = scene(seed, 1.0, 0.0);
        let init = normalized_eight_point(&s.corrs_noisy).unwrap();
        let fit = algebraic_minimization(&s.corrs_noisy, &init).unwrap();
        assert!(fit.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(fit.trace.len(), fit.iterates.len());
        assert!(fit.iterates.iter().all(|f| f.is_rank2()));
        assert!(fit.f.is_rank2());
        assert!(fit.trace.last().unwrap() <= &fit.trace[0]);
    }
}

#[test]
fn algebraic_minimization_keeps_exact_solutions() {
    let s = scene(5, 0.0, 0.0);
    let fit = algebraic_minimization(&s.corrs_exact, &s.f_gt).unwrap();
    assert!(fmat_distance(&fit.f, &s.f_gt).unwrap() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hartley_centres_and_scales(pts in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..40)) {
        let points: Vec<HomoPoint> = pts.iter().map(|&(x, y)| HomoPoint::from_pixel(x, y)).collect();
        prop_assume!(pts.iter().any(|p| (p.0 - pts[0].0).hypot(p.1 - pts[0].1) > 1e-3));
        let (_, out) = hartley_normalize(&points).unwrap();
        let n = out.len() as f64;
        let cx = out.iter().map(|p| p.x / p.w).sum::<f64>() / n;
        let cy = out.iter().map(|p| p.y / p.w).sum::<f64>() / n;
        let md = out.iter().map(|p| (p.x / p.w).hypot(p.y / p.w)).sum::<f64>() / n;
        prop_assert!(cx.abs() < 1e-9 && cy.abs() < 1e-9);
        prop_assert!((md - std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn eight_point_ignores_correspondence_order(seed in 0u64..1000, rot in 1usize..59) {
        let s = scene(seed, 0.5, 0.0);
        let mut pairs = s.corrs_noisy.pairs().to_vec();
        pairs.rotate_left(rot);
        let shuffled = CorrSet::new(pairs).unwrap();
        let a = normalized_eight_point(&s.corrs_noisy).unwrap();
        let b = normalized_eight_point(&shuffled).unwrap();
        prop_assert!(fmat_distance(&a, &b).unwrap() < 1e-9);
    }
}
