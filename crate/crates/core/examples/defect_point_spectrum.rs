//! A boundary defect on a periodic zipper creates an isolated eigenvalue in
//! a gap. Its angle, contraction and weight are read off the monodromy and
//! checked against a dense truncation.
//!
//! ```bash
//! cargo run --release --example defect_point_spectrum
//! ```

use onechannel::finite::{assemble, spectral_measure};
use onechannel::mat2core::{c, cis, Mat2};
use onechannel::periodic::{band_set, point_spectrum, PeriodicZipper};
use std::f64::consts::{PI, TAU};

fn main() -> onechannel::Result<()> {
    let base = PeriodicZipper::theta(PI / 6.0)?;
    let zp = base.with_v0(Mat2::diag(cis(1.0), c(1.0, 0.0)) * base.v0)?;
    let bands = band_set(&zp, 4096, 1e-12)?;
    println!("bands: {:?}", bands.arcs);

    let levels = 300;
    let op = assemble(&zp.to_model(levels)?, levels, zp.u, c(1.0, 0.0), false)?;
    let measure = spectral_measure(&op)?;
    for e in point_spectrum(&zp, zp.u, 4096)? {
        let (angle, weight) = measure
            .iter()
            .copied()
            .min_by(|a, b| dist(a.0, e.angle).total_cmp(&dist(b.0, e.angle)))
            .expect("non-empty spectrum");
        println!("eigenvalue at {:.10} (truncation {angle:.10})", e.angle);
        println!("  |lambda| per period {:.6}, weight {:.8} (truncation {weight:.8})", e.contraction, e.weight);
    }
    Ok(())
}

fn dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
