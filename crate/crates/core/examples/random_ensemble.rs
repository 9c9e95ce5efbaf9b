//! Fourth moments of diagonalised transfer products under random
//! perturbations: bounded when the strength is square summable, growing when
//! it is constant.
//!
//! ```bash
//! cargo run --release --example random_ensemble
//! ```

use onechannel::periodic::PeriodicZipper;
use onechannel::random::{base_moment, fourth_moment_curve, EnsembleConfig};
use std::f64::consts::PI;

fn main() -> onechannel::Result<()> {
    let base = PeriodicZipper::theta(PI / 6.0)?;
    let periods = [25, 50, 100, 200];
    let phi = PI / 2.0;
    let decaying = EnsembleConfig::new(base.clone(), 1.0, 0.1, 1000, 2024, 200)?;
    let constant = EnsembleConfig::control(base, 0.1, 1000, 2024, 200)?;
    println!("unperturbed moment: {:.4}", base_moment(&decaying, phi, 200)?);
    for (name, cfg) in [("gamma_n = 0.1 (n+1)^-1", &decaying), ("gamma_n = 0.1", &constant)] {
        println!("{name}");
        for p in fourth_moment_curve(cfg, phi, &periods, 1000)? {
            println!("  {:>4} periods: {:.4e} +- {:.1e}", p.periods, p.moment4, p.stderr);
        }
    }
    Ok(())
}
