//! Random perturbations `V̂_n = V_n exp(γ_n A_n)`, `Ŵ_n = W_n exp(γ_n B_n)`
//! of a periodic zipper with `γ_n = c(n+1)^{−α}`, and the fourth-moment
//! diagnostic of the transfer products in the diagonalising basis.
//!
//! Every block draws from its own ChaCha8 stream keyed by
//! `(seed, realization, n, tag)`, so blocks at different levels are
//! independent by construction and any block can be regenerated alone.

use crate::error::{Error, Result};
use crate::mat2core::{c, cis, Mat2, C64};
use crate::model::{build_zipper, OneChannelModel, ZipperSpec};
use crate::periodic::{diagonalize_monodromy, initial_transfer, PeriodicZipper};
use crate::spectrum::{carmona_density, DensityGrid};
use crate::transfer::transfer_step;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Resamples allowed per block before giving up on (C3).
pub const MAX_RESAMPLES: usize = 100;

const TAG_V: u64 = 0;
const TAG_W: u64 = 1;

/// How the perturbation strength depends on the level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Decay {
    /// `γ_n = c(n+1)^{−α}` with `α > 1/2`.
    Power { alpha: f64 },
    /// `γ_n = c` for all `n`; the localisation control.
    Constant,
}

/// A random ensemble around a periodic base zipper.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub base: PeriodicZipper,
    pub decay: Decay,
    pub amplitude: f64,
    pub realizations: usize,
    pub seed: u64,
    /// Sampled models cover levels `0..=n_max`.
    pub n_max: usize,
}

impl EnsembleConfig {
    /// Square-summable perturbations; `alpha` must exceed 1/2.
    pub fn new(base: PeriodicZipper, alpha: f64, amplitude: f64, realizations: usize, seed: u64, n_max: usize) -> Result<Self> {
        if !(alpha > 0.5) {
            return Err(Error::Config(format!("(C2) requires alpha > 1/2, got {alpha}")));
        }
        Self::checked(base, Decay::Power { alpha }, amplitude, realizations, seed, n_max)
    }

    /// Non-decaying perturbations of constant strength `amplitude`.
    pub fn control(base: PeriodicZipper, amplitude: f64, realizations: usize, seed: u64, n_max: usize) -> Result<Self> {
        Self::checked(base, Decay::Constant, amplitude, realizations, seed, n_max)
    }

    fn checked(base: PeriodicZipper, decay: Decay, amplitude: f64, realizations: usize, seed: u64, n_max: usize) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::Config(format!("amplitude must be finite and nonnegative, got {amplitude}")));
        }
        if realizations == 0 {
            return Err(Error::Config("at least one realization is required".into()));
        }
        Ok(EnsembleConfig { base, decay, amplitude, realizations, seed, n_max })
    }

    /// Strength `γ_n` at level `n`.
    pub fn gamma(&self, n: usize) -> f64 {
        match self.decay {
            Decay::Power { alpha } => self.amplitude * ((n + 1) as f64).powf(-alpha),
            Decay::Constant => self.amplitude,
        }
    }

    /// `ε₀/2`, the floor every sampled `|𝔟̂_n|`, `|b̂_n|` must respect.
    pub fn channel_floor(&self) -> f64 {
        0.5 * self.base.min_channel_entry()
    }
}

/// The stream for one block. Realizations get 30 bits, levels 32, tags 2.
fn stream(seed: u64, realization: usize, n: usize, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((realization as u64) << 34) | ((n as u64) << 2) | tag);
    rng
}

/// `exp(γA)` for `A = i(xσ_x + yσ_y + zσ_z)/√3`, via the unit-quaternion form.
pub fn su2_exp(gamma: f64, xyz: [f64; 3]) -> Mat2 {
    let [x, y, z] = xyz;
    let norm = (x * x + y * y + z * z).sqrt();
    if norm == 0.0 {
        return Mat2::identity();
    }
    let angle = gamma * norm / 3f64.sqrt();
    let (s, co) = angle.sin_cos();
    let (nx, ny, nz) = (x / norm, y / norm, z / norm);
    // cos(a) I + i sin(a) (n·σ)
    Mat2::new(c(co, s * nz), c(s * ny, s * nx), c(-s * ny, s * nx), c(co, -s * nz))
}

fn draw_generator(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]
}

fn perturb(cfg: &EnsembleConfig, block: &Mat2, realization: usize, n: usize, tag: u64) -> Result<Mat2> {
    let gamma = cfg.gamma(n);
    if gamma == 0.0 {
        return Ok(*block);
    }
    let floor = cfg.channel_floor();
    let mut rng = stream(cfg.seed, realization, n, tag);
    for _ in 0..MAX_RESAMPLES {
        let m = *block * su2_exp(gamma, draw_generator(&mut rng));
        if m.a12.norm() >= floor {
            return Ok(m);
        }
    }
    Err(Error::C3Violation { level: n })
}

/// Blocks of one realization for levels `0..=cfg.n_max`.
pub fn sample_blocks(cfg: &EnsembleConfig, realization: usize) -> Result<ZipperSpec> {
    let mut v = Vec::with_capacity(cfg.n_max + 1);
    let mut w = Vec::with_capacity(cfg.n_max);
    v.push(perturb(cfg, &cfg.base.v0, realization, 0, TAG_V)?);
    for n in 1..=cfg.n_max {
        let (vn, wn) = cfg.base.block(n);
        v.push(perturb(cfg, &vn, realization, n, TAG_V)?);
        w.push(perturb(cfg, &wn, realization, n, TAG_W)?);
    }
    Ok(ZipperSpec { v, w })
}

/// One realization as a one-channel model.
pub fn sample_model(cfg: &EnsembleConfig, realization: usize) -> Result<OneChannelModel> {
    build_zipper(&sample_blocks(cfg, realization)?, cfg.base.u)
}

/// Monte-Carlo estimate at one number of periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentPoint {
    pub periods: usize,
    pub moment4: f64,
    pub stderr: f64,
}

/// `E‖M⁻¹ T̂_{z,[0,np]} M‖⁴` over realizations `0..samples`, for each `n` in
/// `periods` (sorted ascending on output).
pub fn fourth_moment_curve(cfg: &EnsembleConfig, phi: f64, periods: &[usize], samples: usize) -> Result<Vec<MomentPoint>> {
    let diag = diagonalize_monodromy(&cfg.base, phi)?;
    let m = diag.m;
    let m_inv = m.inverse()?;
    let mut periods: Vec<usize> = periods.to_vec();
    periods.sort_unstable();
    periods.dedup();
    let p = cfg.base.period();
    let last = periods.last().copied().unwrap_or(0) * p;
    if last > cfg.n_max {
        return Err(Error::Config(format!("{} periods need n_max ≥ {last}, got {}", periods.last().unwrap(), cfg.n_max)));
    }
    let z = cis(phi);
    let per_sample = (0..samples)
        .into_par_iter()
        .map(|r| {
            let model = sample_model(cfg, r)?;
            let mut t = transfer_step(&model, 0, z)?;
            let mut out = Vec::with_capacity(periods.len());
            let mut level = 0;
            for &n in &periods {
                while level < n * p {
                    level += 1;
                    t = transfer_step(&model, level, z)? * t;
                }
                out.push((m_inv * t * m).norm().powi(4));
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let k = samples as f64;
    Ok(periods
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mean = per_sample.iter().map(|v| v[i]).sum::<f64>() / k;
            let var = if samples > 1 { per_sample.iter().map(|v| (v[i] - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
            MomentPoint { periods: n, moment4: mean, stderr: (var / k).sqrt() }
        })
        .collect())
}

/// CSV with header `n,moment4,stderr`.
pub fn write_moment_csv<W: Write>(points: &[MomentPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,moment4,stderr")?;
    for p in points {
        writeln!(out, "{},{:.16e},{:.16e}", p.periods, p.moment4, p.stderr)?;
    }
    Ok(())
}

/// Density of one realization at level `n`.
pub fn perturbed_density(cfg: &EnsembleConfig, realization: usize, u: C64, n: usize, grid: usize) -> Result<DensityGrid> {
    let model = sample_model(cfg, realization)?;
    carmona_density(&model, u, n.min(cfg.n_max), grid)
}

/// The unperturbed product `T_z^n T_{z,0}` in the diagonal basis, for reference.
pub fn base_moment(cfg: &EnsembleConfig, phi: f64, periods: usize) -> Result<f64> {
    let d = diagonalize_monodromy(&cfg.base, phi)?;
    let z = cis(phi);
    let mut t = initial_transfer(&cfg.base, z);
    let tz = crate::periodic::monodromy(&cfg.base, z);
    for _ in 0..periods {
        t = tz * t;
    }
    Ok((d.m.inverse()? * t * d.m).norm().powi(4))
}

/// Echo of an ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleManifest {
    pub decay: Decay,
    pub amplitude: f64,
    pub realizations: usize,
    pub seed: u64,
    pub n_max: usize,
    pub period: usize,
    pub phi: f64,
    pub periods: Vec<usize>,
    pub stream_key: String,
}

impl EnsembleManifest {
    pub fn new(cfg: &EnsembleConfig, phi: f64, periods: &[usize]) -> Self {
        EnsembleManifest {
            decay: cfg.decay,
            amplitude: cfg.amplitude,
            realizations: cfg.realizations,
            seed: cfg.seed,
            n_max: cfg.n_max,
            period: cfg.base.period(),
            phi,
            periods: periods.to_vec(),
            stream_key: "chacha8(seed), stream = realization<<34 | n<<2 | tag (V=0, W=1)".into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::PeriodicZipper;
    use crate::spectrum::DensityGrid;
    use std::f64::consts::PI;

    fn base() -> PeriodicZipper {
        PeriodicZipper::theta(PI / 6.0).unwrap()
    }

    #[test]
    fn rejects_slow_decay() {
        assert!(matches!(EnsembleConfig::new(base(), 0.4, 0.1, 1, 0, 10), Err(Error::Config(_))));
        assert!(EnsembleConfig::new(base(), 0.5, 0.1, 1, 0, 10).is_err());
        assert!(EnsembleConfig::control(base(), 0.1, 1, 0, 10).is_ok());
    }

    #[test]
    fn zero_amplitude_is_base() {
        let cfg = EnsembleConfig::new(base(), 1.0, 0.0, 1, 5, 12).unwrap();
        assert_eq!(sample_blocks(&cfg, 3).unwrap(), cfg.base.spec(12));
    }

    #[test]
    fn exponential_is_unitary_and_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let g: f64 = rng.random_range(0.0..2.0);
            let e = su2_exp(g, draw_generator(&mut rng));
            assert!(e.unitary_defect() < 1e-12);
            assert!((e.det() - c(1.0, 0.0)).norm() < 1e-12);
            assert!((e - Mat2::identity()).norm() <= g * (1.0 + g) + 1e-15);
        }
    }

    #[test]
    fn exponential_matches_series() {
        let xyz = [0.3, -0.7, 0.5];
        let g = 0.8;
        let s = 1.0 / 3f64.sqrt();
        let a = Mat2::new(c(0.0, xyz[2] * s), c(xyz[1] * s, xyz[0] * s), c(-xyz[1] * s, xyz[0] * s), c(0.0, -xyz[2] * s)).scale(c(g, 0.0));
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..30 {
            term = (term * a).scale(c(1.0 / k as f64, 0.0));
            sum = sum + term;
        }
        assert!(su2_exp(g, xyz).max_abs_diff(&sum) < 1e-14);
    }

    #[test]
    fn perturbation_bound_per_level() {
        let cfg = EnsembleConfig::new(base(), 0.8, 0.3, 1, 7, 50).unwrap();
        let spec = sample_blocks(&cfg, 0).unwrap();
        let b = cfg.base.spec(50);
        for n in 0..=50 {
            let g = cfg.gamma(n);
            assert!((spec.v[n] - b.v[n]).norm() <= g * (1.0 + g) + 1e-14);
        }
    }

    #[test]
    fn sampling_is_reproducible_and_keyed() {
        let cfg = EnsembleConfig::new(base(), 1.0, 0.2, 4, 99, 20).unwrap();
        assert_eq!(sample_blocks(&cfg, 2).unwrap(), sample_blocks(&cfg, 2).unwrap());
        assert_ne!(sample_blocks(&cfg, 2).unwrap(), sample_blocks(&cfg, 3).unwrap());
        // a longer model shares its first levels
        let longer = EnsembleConfig { n_max: 40, ..cfg.clone() };
        let (a, b) = (sample_blocks(&cfg, 1).unwrap(), sample_blocks(&longer, 1).unwrap());
        assert_eq!(a.v[..], b.v[..21]);
    }

    #[test]
    fn levels_are_uncorrelated() {
        let samples = 2000;
        let cfg = EnsembleConfig::control(base(), 0.5, samples, 3, 2).unwrap();
        let entry = |r: usize, n: usize| sample_blocks(&cfg, r).unwrap().v[n].a11.im;
        let xs: Vec<f64> = (0..samples).map(|r| entry(r, 1)).collect();
        let ys: Vec<f64> = (0..samples).map(|r| entry(r, 2)).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mx, my) = (mean(&xs), mean(&ys));
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        assert!((cov / (vx * vy).sqrt()).abs() < 3.0 / (samples as f64).sqrt());
    }

    #[test]
    fn channel_floor_enforced() {
        // a block with a tiny channel entry cannot survive a large kick
        let v = Mat2::reflection(0.05);
        let zp = PeriodicZipper::uniform(v, Mat2::swap(), c(1.0, 0.0)).unwrap();
        let cfg = EnsembleConfig::control(zp, 1.5, 1, 0, 30).unwrap();
        match sample_blocks(&cfg, 0) {
            Ok(spec) => assert!(spec.v.iter().all(|m| m.a12.norm() >= cfg.channel_floor())),
            Err(e) => assert!(matches!(e, Error::C3Violation { .. })),
        }
    }

    #[test]
    fn empirical_c2_sum_decreases_in_alpha() {
        let total = |alpha: f64| {
            let cfg = EnsembleConfig::new(base(), alpha, 0.2, 1, 11, 60).unwrap();
            let b = cfg.base.spec(60);
            let reps = 200;
            let specs: Vec<ZipperSpec> = (0..reps).map(|r| sample_blocks(&cfg, r).unwrap()).collect();
            (0..=60)
                .map(|n| {
                    let mean = specs.iter().fold(Mat2::zero(), |acc, s| acc + s.v[n]).scale(c(1.0 / reps as f64, 0.0));
                    let sq = specs.iter().map(|s| (s.v[n] - b.v[n]).norm().powi(2)).sum::<f64>() / reps as f64;
                    (mean - b.v[n]).norm() + sq
                })
                .sum::<f64>()
        };
        let (a, b, d) = (total(0.75), total(1.0), total(1.5));
        assert!(a > b && b > d, "{a} {b} {d}");
    }

    #[test]
    fn unperturbed_moment_curve_is_flat() {
        let cfg = EnsembleConfig::new(base(), 1.0, 0.0, 1, 0, 60).unwrap();
        let curve = fourth_moment_curve(&cfg, PI / 2.0, &[10, 30, 60], 3).unwrap();
        let first = curve[0].moment4;
        for p in &curve {
            assert!((p.moment4 - first).abs() < 1e-8 * first);
            assert!(p.stderr < 1e-12);
        }
        assert!((base_moment(&cfg, PI / 2.0, 60).unwrap() - first).abs() < 1e-8 * first);
    }

    #[test]
    fn moment_curve_rejects_band_edge() {
        let cfg = EnsembleConfig::new(base(), 1.0, 0.1, 1, 0, 10).unwrap();
        assert!(matches!(fourth_moment_curve(&cfg, PI / 3.0, &[1], 2), Err(Error::NearBandEdge { .. })));
    }

    #[test]
    fn moment_curve_is_deterministic() {
        let cfg = EnsembleConfig::new(base(), 1.0, 0.1, 1, 42, 40).unwrap();
        let a = fourth_moment_curve(&cfg, PI / 2.0, &[10, 40], 50).unwrap();
        let b = fourth_moment_curve(&cfg, PI / 2.0, &[40, 10], 50).unwrap();
        assert_eq!(a, b);
        let mut buf = Vec::new();
        write_moment_csv(&a, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,moment4,stderr\n10,"));
    }

    #[test]
    fn density_distance_shrinks_with_amplitude() {
        let n = 60;
        let base_density = carmona_density(&base().to_model(n).unwrap(), c(1.0, 0.0), n, 512).unwrap();
        let in_band = |d: &DensityGrid| {
            // restrict to |cos φ| < 0.4, well inside the bands
            let keep: Vec<Option<f64>> =
                d.angles.iter().zip(&d.values).map(|(p, v)| if p.cos().abs() < 0.4 { *v } else { None }).collect();
            DensityGrid { values: keep, ..d.clone() }
        };
        let dist = |amp: f64| {
            let cfg = EnsembleConfig::new(base(), 1.0, amp, 8, 5, n).unwrap();
            (0..8).map(|r| in_band(&perturbed_density(&cfg, r, c(1.0, 0.0), n, 512).unwrap()).l1_distance(&in_band(&base_density))).sum::<f64>()
        };
        let (a, b, d) = (dist(0.2), dist(0.1), dist(0.05));
        assert!(a > b && b > d, "{a} {b} {d}");
        let zero = EnsembleConfig::new(base(), 1.0, 0.0, 1, 5, n).unwrap();
        assert_eq!(perturbed_density(&zero, 0, c(1.0, 0.0), n, 512).unwrap(), base_density);
    }
}
