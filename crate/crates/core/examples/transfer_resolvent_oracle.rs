//! Transfer matrices of a model with shells of mixed sizes, rebuilt from the
//! boundary resolvent of its dense truncation.
//!
//! ```bash
//! cargo run --release --example transfer_resolvent_oracle
//! ```

use onechannel::finite::transfer_from_resolvent;
use onechannel::mat2core::cis;
use onechannel::selftest::random_mixed_model;
use onechannel::transfer::transfer_product;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> onechannel::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let model = random_mixed_model(&mut rng, 5, 5);
    println!("shell sizes {:?}", model.shells().iter().map(|s| s.size).collect::<Vec<_>>());
    for (r, phi) in [(0.6, 0.3), (0.8, 2.0), (0.93, 4.5)] {
        let z = cis(phi) * r;
        let t = transfer_product(&model, z, 5, false)?.matrix;
        let from_resolvent = transfer_from_resolvent(&model, 5, z)?;
        println!("z = {r} e^(i {phi}): |T| = {:.4}, relative gap {:.1e}", t.norm(), t.max_abs_diff(&from_resolvent) / t.frobenius());
    }
    Ok(())
}
