//! Refine a linear estimate by minimizing |A vec(F)| over rank-2 matrices.

use epigeom::estimators::{algebraic_minimization, normalized_eight_point};
use epigeom::metrics::fmat_distance;
use epigeom::scene::{generate_scene, SceneConfig};

fn main() -> Result<(), epigeom::error::Error> {
    let scene = generate_scene(&SceneConfig { seed: 11, noise_sigma: 1.0, ..Default::default() })?;
    let init = normalized_eight_point(&scene.corrs_noisy)?;
    let fit = algebraic_minimization(&scene.corrs_noisy, &init)?;
    let last = fit.trace.len() - 1;
    for (i, v) in fit.trace.iter().enumerate().filter(|(i, _)| i % 10 == 0 || *i == last) {
        println!("iteration {i:>3}: |A f| = {v:.10e}");
    }
    println!("distance to truth: initial {:.3e}, refined {:.3e}", fmat_distance(&init, &scene.f_gt)?, fmat_distance(&fit.f, &scene.f_gt)?);
    Ok(())
}
