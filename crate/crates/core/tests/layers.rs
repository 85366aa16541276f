use epigeom::geometry::{compose_fundamental, CameraIntrinsics, FMat, Mat3, RelativePose, Vec3};
use epigeom::layers::{
    epi_forward, loss, normalize, reconstruct_forward, EpiParams, LossWeights, NormKind, Normalized, ReconParams,
};
use epigeom::metrics::fmat_distance;
use proptest::prelude::*;

fn recon_params() -> impl Strategy<Value = ReconParams> {
    (
        0.2f64..5.0,
        0.2f64..5.0,
        prop::array::uniform3(-2.0f64..2.0),
        prop::array::uniform3(-3.2f64..3.2),
    )
        .prop_filter("translation away from zero", |(_, _, t, _)| Vec3::from(*t).norm() > 1e-3)
        .prop_map(|(f1, f2, t, r)| ReconParams::new(f1, f2, Vec3::from(t), Vec3::from(r)))
}

fn principal() -> impl Strategy<Value = [(f64, f64); 2]> {
    prop::array::uniform4(-300.0f64..300.0).prop_map(|p| [(p[0], p[1]), (p[2], p[3])])
}

fn epi_params() -> impl Strategy<Value = EpiParams> {
    (prop::array::uniform3(-3.0f64..3.0), prop::array::uniform3(-3.0f64..3.0), -3.0f64..3.0, -3.0f64..3.0)
        .prop_filter("independent columns", |(a, b, _, _)| {
            Vec3::from(*a).cross(&Vec3::from(*b)).norm() > 1e-2 * (1.0 + Vec3::from(*a).norm() * Vec3::from(*b).norm())
        })
        .prop_map(|(a, b, al, be)| EpiParams::new(Vec3::from(a), Vec3::from(b), al, be))
}

fn generic_matrix() -> impl Strategy<Value = FMat> {
    prop::array::uniform9(-10.0f64..10.0)
        .prop_filter("bounded away from zero", |v| v.iter().any(|x| x.abs() > 1e-3) && v[8].abs() > 1e-3)
        .prop_map(|v| FMat::from_row_major(&v))
}

fn rank_ratio(f: &FMat) -> f64 {
    let s = f.singular_values();
    s[2] / s[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reconstruction_is_rank_two(theta in recon_params(), pp in principal()) {
        let f = reconstruct_forward(&theta, &pp).unwrap();
        prop_assert!(rank_ratio(&f) <= 1e-10);
    }

    #[test]
    fn reconstruction_matches_direct_composition(theta in recon_params(), pp in principal()) {
        let (k1, k2) = theta.cameras(&pp);
        let direct = compose_fundamental(&k1, &k2, &RelativePose::new(theta.translation(), theta.angles())).unwrap();
        let f = reconstruct_forward(&theta, &pp).unwrap();
        prop_assert!(fmat_distance(&f, &direct).unwrap() < 1e-9);
    }

    #[test]
    fn epipolar_form_is_rank_two(v in epi_params()) {
        let f = epi_forward(&v).unwrap();
        prop_assert!(rank_ratio(&f) <= 1e-10);
        // third column is the stated combination of the first two
        let m = f.matrix();
        let want = m.column(0) * v.alpha() + m.column(1) * v.beta();
        prop_assert!((m.column(2) - want).amax() <= 1e-12 * (1.0 + want.amax()));
    }

    #[test]
    fn epipolar_round_trip(v in epi_params()) {
        let f = epi_forward(&v).unwrap();
        let back = epi_forward(&EpiParams::from_fmat(&f).unwrap()).unwrap();
        prop_assert!(fmat_distance(&f, &back).unwrap() < 1e-9);
    }

    #[test]
    fn normalizations_fix_scale(f in generic_matrix(), s in 0.01f64..100.0) {
        let fbn = normalize(&f, NormKind::Fbn).unwrap();
        prop_assert!((fbn.frobenius_norm() - 1.0).abs() <= 1e-12);
        let abs = normalize(&f, NormKind::Abs).unwrap();
        prop_assert!((abs.matrix().amax() - 1.0).abs() <= 1e-12);
        let etr = normalize(&f, NormKind::Etr).unwrap();
        prop_assert_eq!(etr.matrix()[(2, 2)], 1.0);
        // positive rescaling leaves every normalization unchanged
        for kind in NormKind::ALL {
            let a = normalize(&f, kind).unwrap();
            let b = normalize(&f.scaled(s), kind).unwrap();
            prop_assert!((a.matrix() - b.matrix()).amax() <= 1e-12);
        }
    }

    #[test]
    fn loss_is_nonnegative_and_zero_on_self(a in generic_matrix(), b in generic_matrix()) {
        for kind in NormKind::ALL {
            let (pa, pb) = (Normalized::new(&a, kind).unwrap(), Normalized::new(&b, kind).unwrap());
            let (v, _) = loss(&pa, &pb, LossWeights::default()).unwrap();
            prop_assert!(v >= 0.0);
            let (z, g) = loss(&pa, &pa, LossWeights::default()).unwrap();
            prop_assert_eq!(z, 0.0);
            prop_assert_eq!(g, Mat3::zeros());
        }
    }
}

#[test]
fn unit_cameras_reduce_to_essential_matrix() {
    let theta = ReconParams::new(1.0, 1.0, Vec3::new(1.0, 0.0, 0.0), Vec3::zeros());
    let f = reconstruct_forward(&theta, &[(0.0, 0.0); 2]).unwrap();
    let want = Mat3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
    assert!((f.matrix() - want).amax() < 1e-15);
    let k = CameraIntrinsics::identity();
    let g = compose_fundamental(&k, &k, &RelativePose::new(Vec3::x(), Vec3::zeros())).unwrap();
    assert_eq!(f, g);
}

#[test]
fn fbn_ignores_target_scale_in_loss() {
    let a = FMat::from_row_major(&[0.1, 0.4, -0.3, 0.2, -0.5, 0.9, 0.3, 0.1, 1.0]);
    let b = FMat::from_row_major(&[0.2, 0.3, -0.1, 0.2, -0.4, 0.7, 0.5, 0.2, 0.8]);
    let pa = Normalized::new(&a, NormKind::Fbn).unwrap();
    let (v1, _) = loss(&pa, &Normalized::new(&b, NormKind::Fbn).unwrap(), LossWeights::default()).unwrap();
    let (v2, _) = loss(&pa, &Normalized::new(&b.scaled(7.5), NormKind::Fbn).unwrap(), LossWeights::default()).unwrap();
    assert!((v1 - v2).abs() < 1e-14);
}

#[test]
fn mixed_normalizations_are_rejected() {
    let a = FMat::from_row_major(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let r = loss(&Normalized::new(&a, NormKind::Fbn).unwrap(), &Normalized::raw(a), LossWeights::default());
    assert!(r.is_err());
}
