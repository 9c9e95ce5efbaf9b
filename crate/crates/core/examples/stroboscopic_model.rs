//! Stroboscopic walk on the square lattice, cut into ring shells around the
//! origin. Each ring rotates in place; neighbouring rings talk through one
//! coin.
//!
//! With Hadamard coins the walk has eigenvalues at the fourth roots of
//! unity: the level-n density grows without bound there while the dense
//! truncation puts a fixed weight on them.
//!
//! ```bash
//! cargo run --release --example stroboscopic_model
//! ```

use onechannel::finite::{assemble, spectral_measure};
use onechannel::mat2core::{c, unitary_defect, Mat2};
use onechannel::model::{build_stroboscopic, SiteChoice};
use onechannel::spectrum::carmona_density;
use std::f64::consts::{FRAC_PI_2, TAU};

fn main() -> onechannel::Result<()> {
    let levels = 10;
    let coins = vec![Mat2::hadamard(); levels];
    let model = build_stroboscopic(levels, &coins, &SiteChoice::Default, c(1.0, 0.0))?;
    println!("ring sizes {:?}", model.shells().iter().map(|s| s.size).collect::<Vec<_>>());

    // a four-node grid samples exactly 0, π/2, π, 3π/2
    for n in 1..=6 {
        let d = carmona_density(&model, c(1.0, 0.0), n, 4)?;
        println!("level {n}: density at 0 = {:.4e}, at pi/2 = {:.4e}", d.values[0].unwrap_or(f64::NAN), d.values[1].unwrap_or(f64::NAN));
    }

    let op = assemble(&model, levels, c(1.0, 0.0), c(1.0, 0.0), false)?;
    println!("truncation dimension {}, unitarity defect {:.1e}", op.dim(), unitary_defect(&op.matrix));
    let mu = spectral_measure(&op)?;
    for k in 0..4 {
        let target = k as f64 * FRAC_PI_2;
        let w: f64 = mu.iter().filter(|(a, _)| near(*a, target)).map(|(_, w)| w).sum();
        println!("weight within 1e-8 of {target:.4}: {w:.6}");
    }
    Ok(())
}

fn near(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d) < 1e-8
}
