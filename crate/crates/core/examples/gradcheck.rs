//! Analytic against central finite-difference gradients for every layer.

use epigeom::gradcheck::{gradcheck, Layer};

fn main() -> Result<(), epigeom::error::Error> {
    for layer in Layer::ALL {
        for tie in [false, true] {
            let r = gradcheck(layer, 100, 0, tie)?;
            println!(
                "{:<9} ties={:<5} failures {:>2}  excluded {:>3}  worst {:.2e}",
                layer.to_string(),
                tie,
                r.failures,
                r.ties,
                r.worst_error
            );
        }
    }
    Ok(())
}
