//! Eight-point, normalized eight-point and seven-point estimates on one scene.

use epigeom::estimators::{eight_point, normalized_eight_point, seven_point};
use epigeom::metrics::fmat_distance;
use epigeom::scene::{generate_scene, SceneConfig};

fn main() -> Result<(), epigeom::error::Error> {
    for sigma in [0.0, 0.5, 2.0] {
        let scene = generate_scene(&SceneConfig { seed: 7, noise_sigma: sigma, ..Default::default() })?;
        let c = &scene.corrs_noisy;
        let plain = fmat_distance(&eight_point(c)?, &scene.f_gt)?;
        let normalized = fmat_distance(&normalized_eight_point(c)?, &scene.f_gt)?;
        println!("sigma {sigma:>3}: eight-point {plain:.3e}   normalized {normalized:.3e}");
    }

    // minimal solver on seven exact correspondences: 1 to 3 candidates
    let scene = generate_scene(&SceneConfig { seed: 7, ..Default::default() })?;
    let sample = scene.corrs_exact.subset(&[0, 9, 18, 27, 36, 45, 54])?;
    for (i, f) in seven_point(&sample)?.iter().enumerate() {
        println!("seven-point root {i}: distance {:.3e}", fmat_distance(f, &scene.f_gt)?);
    }
    Ok(())
}
