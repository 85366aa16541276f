//! Gradient-based fit of the reconstruction parameters to correspondences,
//! single start and multi-start.

use epigeom::bench::perturbed_truth;
use epigeom::fit::{fit, multi_start_fit, FitConfig, FitData, Params};
use epigeom::metrics::{epi_abs, fmat_distance};
use epigeom::scene::{generate_scene, SceneConfig};

fn main() -> Result<(), epigeom::error::Error> {
    let scene = generate_scene(&SceneConfig { seed: 2, ..Default::default() })?;
    let init = Params::Recon(perturbed_truth(&scene, 2));
    let cfg = FitConfig { principal: scene.principal_points(), ..Default::default() };
    let data = FitData::Corrs(&scene.corrs_exact);

    let trace = fit(&init, &cfg, data)?;
    println!("single start: {} steps, stop {:?}", trace.steps, trace.stop);
    for (i, v) in trace.objectives.iter().enumerate().step_by(5) {
        println!("  step {i:>4}  objective {v:.6e}");
    }
    println!(
        "  epi_abs {:.3e}  distance to truth {:.3e}",
        epi_abs(&trace.f, &scene.corrs_exact),
        fmat_distance(&trace.f, &scene.f_gt)?
    );

    let best = multi_start_fit(&init, &cfg, data, 8, 99)?;
    println!("best of 8 starts: objective {:.3e}", best.final_objective());
    Ok(())
}
