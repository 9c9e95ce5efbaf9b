//! Model families through the public API: dense truncations, transfer
//! products and the resolvent identities they must satisfy.

use onechannel::config::ModelConfig;
use onechannel::finite::{assemble, assemble_parts, boundary_resolvent, spectral_measure, transfer_from_resolvent};
use onechannel::mat2core::{c, cis, haar_unitary, phi_sharp, unitary_defect, Mat2, MatN};
use onechannel::model::{build_generalized_qw, build_stroboscopic, validate_a1, validate_a1_with_bound, OneChannelModel, Shell, SiteChoice};
use onechannel::selftest::random_mixed_model;
use onechannel::transfer::transfer_product;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn one() -> onechannel::mat2core::C64 {
    c(1.0, 0.0)
}

#[test]
fn stroboscopic_truncation() {
    let w = vec![Mat2::hadamard(); 3];
    let model = build_stroboscopic(3, &w, &SiteChoice::Default, one()).unwrap();
    let op = assemble(&model, 3, cis(0.3), cis(1.1), false).unwrap();
    assert_eq!(op.dim(), 64);
    assert!(unitary_defect(&op.matrix) < 1e-12);
    // 𝒱𝒲 = 𝒱(𝒲𝒱)𝒱*
    let (wm, vm) = assemble_parts(&model, 3, cis(0.3), cis(1.1)).unwrap();
    let tilde = assemble(&model, 3, cis(0.3), cis(1.1), true).unwrap();
    let conj = vm.matmul(&op.matrix).matmul(&vm.adjoint());
    assert!(tilde.matrix.max_abs_diff(&conj) < 1e-12);
    assert!(op.matrix.max_abs_diff(&wm.matmul(&vm)) < 1e-12);
}

#[test]
fn krylov_bound_agrees_with_long_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let size = rng.random_range(2..=6);
        let m = rng.random_range(0..size);
        let p = (m + rng.random_range(1..size)) % size;
        // permutations often disconnect the two modes
        let perm: Vec<usize> = {
            let mut v: Vec<usize> = (0..size).collect();
            for i in (1..size).rev() {
                v.swap(i, rng.random_range(0..=i));
            }
            v
        };
        let v = if rng.random_bool(0.5) { MatN::permutation(&perm) } else { haar_unitary(size, &mut rng) };
        let model = OneChannelModel::new(vec![Shell::new(v, m, p).unwrap()], vec![], one()).unwrap();
        assert_eq!(validate_a1(&model, 0).unwrap(), validate_a1_with_bound(&model, 0, 10 * size).unwrap());
    }
}

#[test]
fn resolvent_identities_on_mixed_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let levels = rng.random_range(0..=5);
        let model = random_mixed_model(&mut rng, levels, 5);
        let z = cis(rng.random_range(0.0..2.0 * PI)) * rng.random_range(0.5..0.95);
        let t = transfer_product(&model, z, levels, false).unwrap();
        assert!(!t.exceptional);
        let t = t.matrix;
        let r = transfer_from_resolvent(&model, levels, z).unwrap();
        assert!(r.max_abs_diff(&t) < 1e-8 * t.frobenius());
        let (u, v) = (cis(rng.random_range(0.0..2.0 * PI)), cis(rng.random_range(0.0..2.0 * PI)));
        let want = Mat2::real(1.0, -1.0, 0.0, 1.0) * Mat2::diag(v, one()) * t * Mat2::diag(one(), u.inv()) * Mat2::real(1.0, 0.0, 1.0, 1.0);
        let got = phi_sharp(&boundary_resolvent(&model, levels, u, v, z, false).unwrap(), 0.0).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-8 * want.frobenius());
    }
}

#[test]
fn carbon_chain_config() {
    let text = r#"{"type": "carbon", "blocks": [
        {"size": 3, "channels": [0, 2], "coin": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]},
        {"size": 4, "channels": [1, 3], "coin": [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0]]},
        {"size": 2, "channels": [0, 1], "coin": [[0.6, 0.8], [0.8, -0.6]]}]}"#;
    let model = ModelConfig::parse(text).unwrap().to_model().unwrap();
    assert_eq!(model.shells().iter().map(|s| s.size).collect::<Vec<_>>(), vec![3, 4, 2]);
    let op = assemble(&model, 2, one(), one(), false).unwrap();
    assert_eq!(op.dim(), 9);
    assert!(unitary_defect(&op.matrix) < 1e-12);
    let total: f64 = spectral_measure(&op).unwrap().iter().map(|(_, w)| w).sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn generalized_walk_spectral_measure_is_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let sizes = [3, 5, 4, 2, 6];
    let channels = [(0, 2), (4, 1), (3, 0), (1, 0), (2, 5)];
    let coins: Vec<MatN> = sizes.iter().map(|&s| haar_unitary(s, &mut rng)).collect();
    let model = build_generalized_qw(&sizes, &channels, &coins, cis(0.4)).unwrap();
    let op = assemble(&model, 4, model.u(), cis(2.0), false).unwrap();
    let mu = spectral_measure(&op).unwrap();
    assert_eq!(mu.len(), sizes.iter().sum::<usize>());
    assert!(mu.windows(2).all(|w| w[0].0 <= w[1].0));
    assert!((mu.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-10);
}

#[test]
fn haar_couplings_keep_transfer_on_u11() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let model = random_mixed_model(&mut rng, 6, 4);
    for _ in 0..50 {
        let z = cis(rng.random_range(0.0..2.0 * PI));
        let t = transfer_product(&model, z, 6, false).unwrap();
        if t.exceptional {
            continue;
        }
        let m = t.matrix;
        let g = Mat2::diag(one(), c(-1.0, 0.0));
        assert!((m.adjoint() * g * m).max_abs_diff(&g) < 1e-9 * m.frobenius().powi(2));
    }
}
