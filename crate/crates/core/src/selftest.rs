//! Oracle suites run by `onechannel selftest`, plus the seeded random model
//! generators they share with the integration tests.
//!
//! Each suite compares two independent evaluation paths and reports the
//! worst discrepancy it saw.

use crate::error::Result;
use crate::finite::{
    assemble, averaged_green, averaged_green_quadrature, boundary_resolvent, eigenfunction_from_transfer, transfer_from_resolvent,
};
use crate::mat2core::{c, cis, haar_u2, haar_unitary, phi_flat, phi_flat_inv, phi_sharp_inv, u11_defect, unitary_defect, Mat2, MatN, C64};
use crate::model::{build_zipper, OneChannelModel, Shell, ZipperSpec};
use crate::periodic::{band_set, point_spectrum, PeriodicZipper};
use crate::spectrum::carmona_density;
use crate::transfer::{channel_block, transfer_product};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

/// Signature of `φ♯`, injectable so the suite can be shown to catch a broken map.
pub type PhiSharp = fn(&Mat2, f64) -> Result<Mat2>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Small,
    Full,
}

impl Scale {
    fn pick(self, small: usize, full: usize) -> usize {
        match self {
            Scale::Small => small,
            Scale::Full => full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed error, or the failing quantity.
    pub worst: f64,
    pub bound: f64,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scale: Scale,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

impl Report {
    pub fn failing(&self) -> Vec<&str> {
        self.suites.iter().filter(|s| !s.passed).map(|s| s.name.as_str()).collect()
    }
}

/// A random zipper over levels `0..=levels`.
pub fn random_zipper(rng: &mut ChaCha8Rng, levels: usize) -> OneChannelModel {
    let v = (0..=levels).map(|_| haar_u2(rng)).collect();
    let w = (0..levels).map(|_| haar_u2(rng)).collect();
    build_zipper(&ZipperSpec { v, w }, c(1.0, 0.0)).expect("Haar blocks are unitary")
}

/// A random model with shells of sizes `2..=max_size` and random channel sites.
pub fn random_mixed_model(rng: &mut ChaCha8Rng, levels: usize, max_size: usize) -> OneChannelModel {
    let shells = (0..=levels)
        .map(|_| {
            let size = rng.random_range(2..=max_size);
            let m = rng.random_range(0..size);
            let p = (m + rng.random_range(1..size)) % size;
            Shell::new(haar_unitary(size, rng), m, p).expect("Haar shells are unitary")
        })
        .collect();
    let w = (0..levels).map(|_| haar_u2(rng)).collect();
    OneChannelModel::new(shells, w, c(1.0, 0.0)).expect("consistent shapes")
}

/// A random periodic zipper of the given period.
pub fn random_periodic(rng: &mut ChaCha8Rng, period: usize) -> PeriodicZipper {
    let v0 = haar_u2(rng);
    let v = (0..period).map(|_| haar_u2(rng)).collect();
    let w = (0..period).map(|_| haar_u2(rng)).collect();
    PeriodicZipper::new(v0, v, w, c(1.0, 0.0)).expect("Haar blocks are valid")
}

/// Random periodic zippers without isolated eigenvalues, so the level-`n`
/// density carries all of the spectral mass.
pub fn random_periodic_without_eigenvalues(seed: u64, count: usize) -> Vec<PeriodicZipper> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = rng.random_range(1..=3);
        let zp = random_periodic(&mut rng, p);
        // well-conditioned blocks keep the bands wide and the scan cheap
        if zp.min_channel_entry() < 0.2 {
            continue;
        }
        if point_spectrum(&zp, zp.u, 4096).map(|e| e.is_empty()).unwrap_or(false) {
            out.push(zp);
        }
    }
    out
}

fn random_point(rng: &mut ChaCha8Rng, rmin: f64, rmax: f64) -> C64 {
    cis(rng.random_range(0.0..2.0 * PI)) * rng.random_range(rmin..rmax)
}

fn finish(name: &str, worst: f64, bound: f64, detail: String, start: Instant) -> SuiteResult {
    SuiteResult { name: name.into(), passed: worst < bound, worst, bound, detail, seconds: start.elapsed().as_secs_f64() }
}

fn rel(a: &Mat2, b: &Mat2) -> f64 {
    a.max_abs_diff(b) / b.frobenius().max(1.0)
}

/// φ♯/φ♭ algebra on Haar-random unitaries: U(1,1) images, inverse maps,
/// the linear-relation characterisation and the block identities.
pub fn suite_phi(samples: usize, seed: u64, phi_sharp: PhiSharp) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut used = 0;
    let bad = |e| {
        let _: crate::error::Error = e;
        f64::INFINITY
    };
    while used < samples {
        let m = haar_u2(&mut rng);
        if m.a12.norm() <= 1e-6 {
            continue;
        }
        used += 1;
        let (s, f) = match (phi_sharp(&m, 0.0), phi_flat(&m, 0.0)) {
            (Ok(s), Ok(f)) => (s, f),
            (Err(e), _) | (_, Err(e)) => {
                worst = worst.max(bad(e));
                continue;
            }
        };
        worst = worst.max(u11_defect(&s)).max(u11_defect(&f));
        // the linear relation itself: (Ψ₋; Ψ₊) = M(Φ₋; Φ₊)
        let phi = [random_point(&mut rng, 0.5, 1.0), random_point(&mut rng, 0.5, 1.0)];
        let psi = m.apply(phi);
        let a = s.apply([psi[0], phi[0]]);
        let b = f.apply([phi[0], psi[0]]);
        let scale = s.frobenius().max(1.0);
        worst = worst
            .max(((a[0] - phi[1]).norm() + (a[1] - psi[1]).norm()) / scale)
            .max(((b[0] - psi[1]).norm() + (b[1] - phi[1]).norm()) / scale);
        // φ♯(M) = φ♭(M⁻¹) and the inverse maps
        let minv = m.adjoint();
        worst = worst.max(phi_flat(&minv, 0.0).map(|x| rel(&x, &s)).unwrap_or_else(bad));
        worst = worst.max(phi_sharp_inv(&s, 0.0).map(|x| x.max_abs_diff(&m)).unwrap_or_else(bad));
        worst = worst.max(phi_flat_inv(&f, 0.0).map(|x| x.max_abs_diff(&m)).unwrap_or_else(bad));
        // diagonal factors on either side
        let (u, v) = (random_point(&mut rng, 0.5, 2.0), random_point(&mut rng, 0.5, 2.0));
        let d = Mat2::diag(u, v);
        let left = phi_sharp(&(d * m), 0.0).map(|x| rel(&x, &(Mat2::diag(c(1.0, 0.0), v) * s * Mat2::diag(u.inv(), c(1.0, 0.0)))));
        let right = phi_sharp(&(m * d), 0.0).map(|x| rel(&x, &(Mat2::diag(v.inv(), c(1.0, 0.0)) * s * Mat2::diag(c(1.0, 0.0), u))));
        worst = worst.max(left.unwrap_or_else(bad)).max(right.unwrap_or_else(bad));
        // Cayley-type identity with (I + M)⁻¹M
        if let Ok(ipm) = (Mat2::identity() + m).inverse() {
            if ipm.norm() < 1e3 {
                let want = Mat2::real(1.0, 1.0, 0.0, 1.0) * s * Mat2::real(1.0, 0.0, -1.0, 1.0);
                worst = worst.max(phi_sharp(&(ipm * m), 0.0).map(|x| rel(&x, &want)).unwrap_or_else(bad));
            }
        }
    }
    finish("phi-identities", worst, 1e-10, format!("{samples} Haar U(2) samples"), start)
}

/// Channel blocks of random shells on the unit circle are unitary.
pub fn suite_schur(samples: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let size = rng.random_range(3..=6);
        let m = rng.random_range(0..size);
        let p = (m + rng.random_range(1..size)) % size;
        let shell = Shell::new(haar_unitary(size, &mut rng), m, p).expect("unitary");
        let model = OneChannelModel::new(vec![shell], vec![], c(1.0, 0.0)).expect("one shell");
        let z = cis(rng.random_range(0.0..2.0 * PI));
        let d = match channel_block(&model, 0, z) {
            Ok(b) => unitary_defect(&MatN::from_mat2(&b)),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(d);
    }
    finish("schur-unitarity", worst, 1e-9, format!("{samples} shells of sizes 3-6"), start)
}

/// Transfer products against boundary resolvents of dense truncations,
/// for the `(1,1)` boundary and for random `(u, v)`.
pub fn suite_transfer_resolvent(models: usize, points: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut skipped = 0;
    for _ in 0..models {
        let levels = rng.random_range(0..=5);
        let model = random_mixed_model(&mut rng, levels, 4);
        for _ in 0..points {
            let z = random_point(&mut rng, 0.5, 0.95);
            let t = match transfer_product(&model, z, levels, false) {
                Ok(t) if !t.exceptional => t.matrix,
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            match transfer_from_resolvent(&model, levels, z) {
                Ok(r) => worst = worst.max(t.max_abs_diff(&r) / t.frobenius()),
                Err(_) => worst = f64::INFINITY,
            }
            let (u, v) = (cis(rng.random_range(0.0..2.0 * PI)), cis(rng.random_range(0.0..2.0 * PI)));
            let want = Mat2::real(1.0, -1.0, 0.0, 1.0)
                * Mat2::diag(v, c(1.0, 0.0))
                * t
                * Mat2::diag(c(1.0, 0.0), u.inv())
                * Mat2::real(1.0, 0.0, 1.0, 1.0);
            match boundary_resolvent(&model, levels, u, v, z, false).and_then(|r| crate::mat2core::phi_sharp(&r, 0.0)) {
                Ok(s) => worst = worst.max(s.max_abs_diff(&want) / want.frobenius()),
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    finish("transfer-resolvent", worst, 1e-7, format!("{models} models x {points} points, {skipped} exceptional skipped"), start)
}

/// The closed-form `v`-average of the Green function against a trapezoid
/// rule over dense resolvents.
pub fn suite_averaged_green(models: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..models {
        let levels = rng.random_range(0..=4);
        let model = random_mixed_model(&mut rng, levels, 4);
        let u = cis(rng.random_range(0.0..2.0 * PI));
        let z = cis(rng.random_range(0.0..2.0 * PI)) * 0.9;
        let err = match (averaged_green(&model, levels, u, z), averaged_green_quadrature(&model, levels, u, z, 512)) {
            (Ok(a), Ok(b)) => (a - b).norm(),
            _ => f64::INFINITY,
        };
        worst = worst.max(err);
    }
    finish("averaged-green", worst, 1e-8, format!("{models} models at |z| = 0.9, 512 nodes"), start)
}

/// Generalised eigenfunctions from transfer matrices solve the truncated
/// eigenvalue equation on every row but the outer boundary.
pub fn suite_eigenfunction(models: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..models {
        let levels = rng.random_range(0..=5);
        let model = random_mixed_model(&mut rng, levels, 4);
        let z = random_point(&mut rng, 0.5, 0.95);
        let u = cis(rng.random_range(0.0..2.0 * PI));
        let (Ok(psi), Ok(op)) = (eigenfunction_from_transfer(&model, levels, z, u), assemble(&model, levels, u, c(1.0, 0.0), false)) else {
            worst = f64::INFINITY;
            continue;
        };
        let norm = psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let r = op.matrix.matvec(&psi);
        for (i, (a, b)) in r.iter().zip(&psi).enumerate() {
            if i != op.row_last {
                worst = worst.max((a - z * b).norm() / norm);
            }
        }
    }
    finish("eigenfunction-residual", worst, 1e-9, format!("{models} random models"), start)
}

/// Density mass: exactly one for the free walk, near one for zippers
/// without isolated eigenvalues. The level-`n` density oscillates about `n`
/// times across a band, so `grid` must be much larger than `level`.
pub fn suite_carmona_mass(models: usize, level: usize, grid: usize, seed: u64) -> SuiteResult {
    let start = Instant::now();
    let one = c(1.0, 0.0);
    let swap = build_zipper(&ZipperSpec { v: vec![Mat2::swap(); level + 1], w: vec![Mat2::swap(); level] }, one).expect("swap");
    let mut worst = match carmona_density(&swap, one, level, grid) {
        Ok(d) => (d.mass() - 1.0).abs(),
        Err(_) => f64::INFINITY,
    };
    for zp in random_periodic_without_eigenvalues(seed, models) {
        let err = zp.to_model(level).and_then(|m| carmona_density(&m, zp.u, level, grid)).map(|d| (d.mass() - 1.0).abs());
        worst = worst.max(err.unwrap_or(f64::INFINITY));
    }
    finish("carmona-mass", worst, 2e-2, format!("swap model + {models} periodic zippers at n = {level}, grid {grid}"), start)
}

/// Band edges of `V = (cos θ, sin θ; sin θ, −cos θ)` sit at `cos φ = ±sin θ`.
pub fn suite_bands() -> SuiteResult {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for th in [PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0] {
        let e = th.sin().acos();
        let mut want = vec![e, PI - e, PI + e, 2.0 * PI - e];
        want.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        if want.last().is_some_and(|x| (x - 2.0 * PI).abs() < 1e-12) {
            want.pop();
        }
        match PeriodicZipper::theta(th).and_then(|z| band_set(&z, 2048, 1e-10)) {
            Ok(b) if b.edges.len() == want.len() => {
                for (x, y) in b.edges.iter().zip(&want) {
                    worst = worst.max((x - y).abs());
                }
            }
            _ => worst = f64::INFINITY,
        }
    }
    finish("bands", worst, 1e-9, "theta family, four angles".into(), start)
}

/// Run every suite; `phi_sharp` is the map under test.
pub fn run(scale: Scale, phi_sharp: PhiSharp) -> Report {
    let suites = vec![
        suite_phi(scale.pick(2_000, 10_000), 1, phi_sharp),
        suite_schur(scale.pick(200, 1_000), 2),
        suite_transfer_resolvent(scale.pick(20, 200), scale.pick(5, 20), 3),
        suite_averaged_green(scale.pick(5, 50), 4),
        suite_eigenfunction(scale.pick(50, 200), 5),
        suite_carmona_mass(scale.pick(5, 10), scale.pick(50, 100), scale.pick(32_768, 131_072), 6),
        suite_bands(),
    ];
    Report { scale, passed: suites.iter().all(|s| s.passed), suites }
}
