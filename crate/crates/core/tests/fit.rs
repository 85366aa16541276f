use epigeom::bench::perturbed_truth;
use epigeom::estimators::eight_point;
use epigeom::fit::{
    fit, multi_start_fit, objective_and_gradient, FitConfig, FitData, Objective, Parametrization, Params,
};
use epigeom::layers::{EpiParams, NormKind};
use epigeom::metrics::epi_abs;
use epigeom::scene::{generate_scene, SceneConfig, SyntheticScene};

fn scene(seed: u64) -> SyntheticScene {
    generate_scene(&SceneConfig { seed, ..Default::default() }).unwrap()
}

fn recon_cfg(s: &SyntheticScene) -> FitConfig {
    FitConfig { principal: s.principal_points(), ..Default::default() }
}

fn numeric_gradient(params: &Params, cfg: &FitConfig, data: FitData) -> [f64; 8] {
    let v = params.values();
    let mut g = [0.0; 8];
    for k in 0..8 {
        let h = 1e-6 * (1.0 + v[k].abs());
        let (mut a, mut b) = (v, v);
        a[k] += h;
        b[k] -= h;
        let fa = objective_and_gradient(&params.with_values(a), cfg, data).unwrap().0;
        let fb = objective_and_gradient(&params.with_values(b), cfg, data).unwrap().0;
        g[k] = (fa - fb) / (2.0 * h);
    }
    g
}

fn rel_err(a: &[f64; 8], b: &[f64; 8]) -> f64 {
    let d = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let m = a.iter().chain(b).map(|x| x.abs()).fold(1e-12, f64::max);
    d / m
}

#[test]
fn truth_is_a_global_minimum() {
    let s = scene(0);
    let cfg = recon_cfg(&s);
    let (v, g) = objective_and_gradient(&Params::Recon(s.recon_params()), &cfg, FitData::Corrs(&s.corrs_exact)).unwrap();
    assert!(v < 1e-18, "{v:e}");
    assert!(g.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-9);
}

#[test]
fn gradient_matches_finite_differences() {
    for seed in 0..10 {
        let s = scene(seed);
        let init = Params::Recon(perturbed_truth(&s, seed));
        for norm in [None, Some(NormKind::Fbn), Some(NormKind::Abs), Some(NormKind::Etr)] {
            let cfg = FitConfig { norm, ..recon_cfg(&s) };
            let data = FitData::Corrs(&s.corrs_exact);
            let (_, g) = objective_and_gradient(&init, &cfg, data).unwrap();
            assert!(rel_err(&g, &numeric_gradient(&init, &cfg, data)) < 1e-5, "seed {seed} {norm:?}");
            let sup = FitConfig { objective: Objective::Supervised, ..cfg };
            let target = FitData::Target(&s.f_gt);
            let (_, g) = objective_and_gradient(&init, &sup, target).unwrap();
            assert!(rel_err(&g, &numeric_gradient(&init, &sup, target)) < 1e-5, "seed {seed} {norm:?} supervised");
        }
    }
}

#[test]
fn supervised_objective_ignores_target_scale() {
    let s = scene(4);
    let init = Params::Recon(perturbed_truth(&s, 4));
    for norm in [NormKind::Fbn, NormKind::Abs] {
        let cfg = FitConfig { norm: Some(norm), objective: Objective::Supervised, ..recon_cfg(&s) };
        let a = objective_and_gradient(&init, &cfg, FitData::Target(&s.f_gt)).unwrap().0;
        let scaled = s.f_gt.scaled(13.0);
        let b = objective_and_gradient(&init, &cfg, FitData::Target(&scaled)).unwrap().0;
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}

#[test]
fn epipolar_fit_from_linear_estimate_descends() {
    for seed in 0..5 {
        let s = generate_scene(&SceneConfig { seed, noise_sigma: 0.5, ..Default::default() }).unwrap();
        let init = Params::Epi(EpiParams::from_fmat(&eight_point(&s.corrs_noisy).unwrap()).unwrap());
        let cfg = FitConfig { parametrization: Parametrization::Epi, max_steps: 200, ..Default::default() };
        let trace = fit(&init, &cfg, FitData::Corrs(&s.corrs_noisy)).unwrap();
        assert!(trace.objectives.windows(2).all(|w| w[1] < w[0]));
        assert!(trace.final_objective() <= trace.objectives[0]);
        assert!(trace.f.is_rank2());
    }
}

#[test]
fn single_start_equals_plain_fit() {
    let s = scene(6);
    let init = Params::Recon(perturbed_truth(&s, 6));
    let cfg = FitConfig { max_steps: 100, ..recon_cfg(&s) };
    let a = fit(&init, &cfg, FitData::Corrs(&s.corrs_exact)).unwrap();
    let b = multi_start_fit(&init, &cfg, FitData::Corrs(&s.corrs_exact), 1, 3).unwrap();
    assert_eq!(a, b);
    let c = multi_start_fit(&init, &cfg, FitData::Corrs(&s.corrs_exact), 4, 3).unwrap();
    let d = multi_start_fit(&init, &cfg, FitData::Corrs(&s.corrs_exact), 4, 3).unwrap();
    assert_eq!(c, d);
}

#[test]
fn multi_start_reaches_the_truth() {
    let mut hits = 0;
    for seed in 0..50 {
        let s = scene(seed);
        let init = Params::Recon(perturbed_truth(&s, seed));
        let best = multi_start_fit(&init, &recon_cfg(&s), FitData::Corrs(&s.corrs_exact), 16, seed).unwrap();
        if epi_abs(&best.f, &s.corrs_exact) < 1e-3 {
            hits += 1;
        }
    }
    assert!(hits >= 45, "{hits}/50 scenes reached the truth");
}
