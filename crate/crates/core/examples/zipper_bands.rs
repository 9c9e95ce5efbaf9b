//! Bands of the periodic zipper `V = (cos θ, sin θ; sin θ, −cos θ)`,
//! `W = swap`: the edges sit at `cos φ = ±sin θ`.
//!
//! ```bash
//! cargo run --release --example zipper_bands
//! ```

use onechannel::periodic::{band_set, discriminant, PeriodicZipper};
use std::f64::consts::PI;

fn main() -> onechannel::Result<()> {
    for (name, theta) in [("pi/6", PI / 6.0), ("pi/4", PI / 4.0), ("pi/3", PI / 3.0), ("pi/2", PI / 2.0)] {
        let zp = PeriodicZipper::theta(theta)?;
        let bands = band_set(&zp, 4096, 1e-12)?;
        let edge = theta.sin().acos();
        println!("theta = {name}: measure {:.9}, closed form {:.9}", bands.measure(), 2.0 * (PI - 2.0 * edge));
        for (a, b) in &bands.arcs {
            println!("  arc [{a:.9}, {b:.9}]");
        }
        for e in &bands.point_spectrum {
            println!("  eigenvalue at {:.6}, |lambda| {:.6}, weight {:.6}", e.angle, e.contraction, e.weight);
        }
        // (Tr T)²/det T; bands are where it is below 4
        println!("  discriminant at pi/2: {:.6}", discriminant(&zp, PI / 2.0)?);
    }
    Ok(())
}
