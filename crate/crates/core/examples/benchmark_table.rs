//! Seeded benchmark: every method under every normalization, as an aligned
//! table and as CSV.

use epigeom::bench::{run_benchmark, BenchmarkSpec, Method};
use epigeom::layers::NormKind;
use epigeom::scene::SceneConfig;

fn main() -> Result<(), epigeom::error::Error> {
    let spec = BenchmarkSpec {
        methods: Method::ALL.to_vec(),
        norms: NormKind::ALL.to_vec(),
        scene: SceneConfig { noise_sigma: 0.5, outlier_fraction: 0.3, ..Default::default() },
        trials: 20,
        seed: 1,
    };
    let table = run_benchmark(&spec, 0)?;
    print!("{}", table.to_text());
    println!();
    print!("{}", table.to_csv());
    Ok(())
}
