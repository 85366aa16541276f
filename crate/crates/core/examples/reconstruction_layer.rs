//! Build F from focal lengths, translation and Euler angles, and push a
//! gradient back through the layer.

use epigeom::geometry::{Mat3, Vec3};
use epigeom::layers::{reconstruct_backward, reconstruct_forward, ReconParams};

fn main() -> Result<(), epigeom::error::Error> {
    let theta = ReconParams::new(500.0, 520.0, Vec3::new(0.9, 0.1, 0.2), Vec3::new(0.02, -0.05, 0.01));
    let principal = [(320.0, 240.0), (320.0, 240.0)];
    let f = reconstruct_forward(&theta, &principal)?;
    println!("F:\n{}", epigeom::io::format_fmat(&f));
    let s = f.singular_values();
    println!("singular values {:.3e} {:.3e} {:.3e}", s[0], s[1], s[2]);

    // d(sum of entries)/d(theta)
    let grad = reconstruct_backward(&theta, &principal, &Mat3::repeat(1.0))?;
    let names = ["f1", "f2", "tx", "ty", "tz", "rx", "ry", "rz"];
    for (n, g) in names.iter().zip(grad) {
        println!("{n:>3}: {g:+.6e}");
    }
    Ok(())
}
