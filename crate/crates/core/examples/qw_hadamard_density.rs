//! Carmona density of the Hadamard walk on the half-line, and how it
//! compares with the Poisson-smoothed measure from a dense truncation.
//!
//! ```bash
//! cargo run --release --example qw_hadamard_density
//! ```

use onechannel::mat2core::{c, Mat2};
use onechannel::model::build_qw1d;
use onechannel::spectrum::{carmona_density, poisson_transform, PoissonSource};

fn main() -> onechannel::Result<()> {
    let n = 200;
    let u = c(1.0, 0.0);
    let walk = build_qw1d(&vec![Mat2::hadamard(); n + 1], u)?;

    // the level-n density has sharp peaks near band edges, so use a fine grid
    let density = carmona_density(&walk, u, n, 65_536)?;
    println!("level {n}: mass {:.4}, masked nodes {}", density.mass(), density.masked_count());
    for k in 0..8 {
        let i = k * density.angles.len() / 8;
        println!("  phi = {:5.3}  density = {:.5}", density.angles[i], density.values[i].unwrap_or(f64::NAN));
    }
    // bands are |cos phi| > 1/sqrt 2; the density decays in the gaps

    let transfer = poisson_transform(&walk, u, PoissonSource::Transfer(n), 0.995, 4096)?;
    let dense = poisson_transform(&walk, u, PoissonSource::FiniteVolume(n), 0.995, 4096)?;
    println!("Poisson at r = 0.995: L1 distance between transfer and dense paths {:.2e}", transfer.l1_distance(&dense));
    Ok(())
}
