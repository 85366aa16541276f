//! Generate a seeded synthetic two-view scene and inspect it.

use epigeom::geometry::epipolar_residual;
use epigeom::scene::{generate_scene, SceneConfig};

fn main() -> Result<(), epigeom::error::Error> {
    let cfg = SceneConfig { seed: 42, noise_sigma: 0.5, outlier_fraction: 0.2, ..Default::default() };
    let scene = generate_scene(&cfg)?;

    let pose = scene.cam2.1;
    println!("translation {:.4?}", pose.t.as_slice());
    println!("euler angles {:.4?}", pose.r.as_slice());
    println!("ground truth F:\n{}", epigeom::io::format_fmat(&scene.f_gt));

    let unit = scene.f_gt.scaled(1.0 / scene.f_gt.frobenius_norm());
    let worst = scene
        .corrs_exact
        .iter()
        .map(|(p, q)| epipolar_residual(&unit, p, q).abs())
        .fold(0.0, f64::max);
    println!("max |q^T F p| on exact correspondences: {worst:.2e}");

    let labels = scene.corrs_noisy.labels().unwrap_or_default();
    let outliers = labels.iter().filter(|l| !**l).count();
    println!("{} noisy correspondences, {outliers} outliers", scene.corrs_noisy.len());
    Ok(())
}
