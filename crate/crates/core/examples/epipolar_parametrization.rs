//! Two columns plus two coefficients: the third column is their
//! combination, so the matrix is rank two by construction.

use epigeom::estimators::normalized_eight_point;
use epigeom::geometry::{right_epipole, Vec3};
use epigeom::layers::{epi_forward, EpiParams};
use epigeom::metrics::fmat_distance;
use epigeom::scene::{generate_scene, SceneConfig};

fn main() -> Result<(), epigeom::error::Error> {
    let v = EpiParams::new(Vec3::new(1.0, 0.2, -0.3), Vec3::new(0.1, 0.8, 0.5), 0.7, -1.2);
    let f = epi_forward(&v)?;
    let e = right_epipole(&f)?;
    println!("right epipole {:.4?} (proportional to (alpha, beta, -1))", (e / -e[2]).as_slice());

    // fit the form to an estimated matrix and map back
    let scene = generate_scene(&SceneConfig { seed: 5, noise_sigma: 0.5, ..Default::default() })?;
    let est = normalized_eight_point(&scene.corrs_noisy)?;
    let params = EpiParams::from_fmat(&est)?;
    println!("alpha {:.4} beta {:.4}", params.alpha(), params.beta());
    println!("round trip distance {:.2e}", fmat_distance(&epi_forward(&params)?, &est)?);
    Ok(())
}
