//! A walk on a chain of carbon-like rings read from a JSON config: shells of
//! different sizes with the channel orbitals at arbitrary positions.
//!
//! Unlike a zipper, a ring shell can trap a bound state. The level-n density
//! then misses exactly the weight of that eigenvalue. The example continues
//! the first n shells with swap shells (which leave the density unchanged),
//! finds the localized eigenvalues of a long truncation and checks that
//! density mass plus point weights is 1.
//!
//! ```bash
//! cargo run --release --example carbon_chain_walk
//! ```

use onechannel::config::ModelConfig;
use onechannel::finite::{assemble, unitary_eigen};
use onechannel::mat2core::{c, Mat2, MatN};
use onechannel::model::{OneChannelModel, Shell};
use onechannel::spectrum::carmona_density;

/// Shells `0..=level` of `model` followed by swap shells up to `total`.
fn swap_continued(model: &OneChannelModel, level: usize, total: usize) -> onechannel::Result<OneChannelModel> {
    let mut shells = model.shells()[..=level].to_vec();
    let mut couplings = model.couplings()[..level].to_vec();
    for _ in level..total {
        shells.push(Shell::new(MatN::from_mat2(&Mat2::swap()), 0, 1)?);
        couplings.push(Mat2::swap());
    }
    OneChannelModel::new(shells, couplings, model.u())
}

fn main() -> onechannel::Result<()> {
    let cfg = ModelConfig::from_file(std::path::Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/carbon_chain.json")))?;
    let model = cfg.to_model()?;
    let top = model.max_level().expect("config has shells");
    println!("{} shells, sizes {:?}", model.len(), model.shells().iter().map(|s| s.size).collect::<Vec<_>>());
    if let Some(e) = model.first_failure(top) {
        println!("channel assumption fails: {e}");
        return Ok(());
    }
    let total = 150;
    for level in [2, 3] {
        let mass = carmona_density(&model, cfg.u(), level, 1 << 16)?.mass();
        let ext = swap_continued(&model, level, total)?;
        let op = assemble(&ext, total, ext.u(), c(1.0, 0.0), false)?;
        let (angles, vectors) = unitary_eigen(&op.matrix)?;
        // localized: almost all of the eigenvector lives within a few shells of the rings
        let cut = op.offsets[level + 3];
        let mut points = Vec::new();
        for (j, &a) in angles.iter().enumerate() {
            let inner: f64 = (0..cut).map(|i| vectors[(i, j)].norm_sqr()).sum();
            let weight = vectors[(0, j)].norm_sqr();
            if inner > 0.999 && weight > 1e-8 {
                points.push((a, weight));
            }
        }
        let point_mass: f64 = points.iter().map(|p| p.1).sum();
        println!("level {level}: density mass {mass:.5}, bound states {points:.5?}, total {:.5}", mass + point_mass);
    }
    Ok(())
}
