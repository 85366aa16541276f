//! Write a scene to disk in the shared text formats and read it back.

use epigeom::io;
use epigeom::scene::{fundamental_from_projections, generate_scene, SceneConfig};

fn main() -> Result<(), epigeom::error::Error> {
    let dir = std::env::temp_dir().join("epigeom-example");
    std::fs::create_dir_all(&dir)?;
    let scene = generate_scene(&SceneConfig { seed: 4, noise_sigma: 0.5, ..Default::default() })?;
    let (p1, p2) = scene.projection_matrices();

    io::write_corrs(&dir.join("corrs.csv"), &scene.corrs_noisy)?;
    io::write_calibration(&dir.join("calib.txt"), &p1, &p2)?;
    io::write_fmat(&dir.join("f_gt.txt"), &scene.f_gt)?;

    let corrs = io::read_corrs(&dir.join("corrs.csv"))?;
    let f = io::read_fmat(&dir.join("f_gt.txt"))?;
    let (q1, q2) = io::read_calibration(&dir.join("calib.txt"))?;
    println!("correspondences identical: {}", corrs == scene.corrs_noisy);
    println!("F identical: {}", f == scene.f_gt);
    let derived = fundamental_from_projections(&q1, &q2)?;
    println!("F from cameras vs stored: {:.2e}", epigeom::metrics::fmat_distance(&derived, &f)?);
    println!("files in {}", dir.display());
    Ok(())
}
