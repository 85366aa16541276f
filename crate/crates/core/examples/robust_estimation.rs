//! RANSAC and LeMedS against the plain eight-point algorithm under outliers.

use epigeom::estimators::{eight_point, lemeds, ransac, RobustConfig};
use epigeom::metrics::{epi_abs, fmat_distance, select_high_confidence};
use epigeom::layers::{normalize, NormKind};
use epigeom::scene::{generate_scene, SceneConfig};

fn main() -> Result<(), epigeom::error::Error> {
    let scene = generate_scene(&SceneConfig { seed: 3, noise_sigma: 0.5, outlier_fraction: 0.3, ..Default::default() })?;
    let corrs = &scene.corrs_noisy;
    let eval = select_high_confidence(corrs, &scene.f_gt, 2.0)?;
    let cfg = RobustConfig::with_seed(1);

    let r = ransac(corrs, &cfg)?;
    let m = lemeds(corrs, &cfg)?;
    let rows = [("eight-point", eight_point(corrs)?), ("RANSAC", r.f), ("LeMedS", m.f)];
    for (name, f) in rows {
        let score = epi_abs(&normalize(&f, NormKind::Fbn)?, &eval);
        println!("{name:<12} EPI-ABS {score:.4e}   distance to truth {:.3e}", fmat_distance(&f, &scene.f_gt)?);
    }
    println!("RANSAC kept {} inliers after {} hypotheses", r.inlier_count(), r.iterations);
    println!("LeMedS kept {} inliers after {} hypotheses", m.inlier_count(), m.iterations);
    Ok(())
}
