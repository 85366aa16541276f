//! ETR, FBN and ABS scale normalization and the combined L1 + L2 loss.

use epigeom::geometry::FMat;
use epigeom::layers::{loss, normalize, LossWeights, NormKind, Normalized};

fn main() -> Result<(), epigeom::error::Error> {
    let f = FMat::from_row_major(&[2e-6, -3e-5, 4e-3, 2.5e-5, 1e-6, -1.2e-2, -3e-3, 1.1e-2, 0.4]);
    // a positive rescale is invisible to every normalization
    let truth = f.scaled(17.0);
    for kind in NormKind::ALL {
        let n = normalize(&f, kind)?;
        let (value, _) = loss(&Normalized::new(&f, kind)?, &Normalized::new(&truth, kind)?, LossWeights::default())?;
        println!(
            "{kind}: frobenius {:.6}  max |entry| {:.6}  f33 {:+.6}  loss vs rescaled copy {value:.3e}",
            n.frobenius_norm(),
            n.matrix().amax(),
            n.matrix()[(2, 2)]
        );
    }
    Ok(())
}
