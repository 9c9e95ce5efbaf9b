//! Channel blocks and radial transfer matrices.
//!
//! For `|z| ≤ 1` the channel block of shell `n` is
//! `Q*(z⁻¹V − P)⁻¹Q = z·Q*(V − zP)⁻¹Q`, and `T♯ = φ♯(block)`. Outside the
//! disk the outer block `Q*(zV* − P)⁻¹Q` is used instead, with `T♯ = φ♭(outer)`.
//! The coupling contributes `T♭ = φ♭(W_n)`, and the one-step matrix is
//! `T_{z,n} = T♯_{z,n} T♭_n` (`T_{z,0} = T♯_{z,0}`).

use crate::error::{Error, Result};
use crate::mat2core::{c, cis, phi_flat, phi_sharp, Mat2, C64};
use crate::model::OneChannelModel;
use crate::numeric::{angle_grid, golden_min, TAU};

/// Conditioning limit for in-shell resolvent solves.
pub const COND_LIMIT: f64 = 1e12;
/// Relative threshold on |β| against the block norm.
pub const BETA_REL_TOL: f64 = 1e-9;
/// Products are rescaled once their norm exceeds this.
pub const RESCALE_AT: f64 = 1e100;

/// Whether the boundary phase has been folded into the product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    None,
    /// Right-multiplied by `diag(1, u⁻¹)`.
    AbsorbedU,
}

/// The product `T_{z,[0,n]} = T_{z,n}⋯T_{z,0}`.
///
/// The true product is `matrix · exp(log_scale)`; `log_scale` stays zero
/// unless the norm crossed [`RESCALE_AT`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferProduct {
    pub z: C64,
    pub n: usize,
    pub matrix: Mat2,
    pub log_scale: f64,
    /// Set when some level had a vanishing β; `matrix` is then meaningless.
    pub exceptional: bool,
    pub exceptional_level: Option<usize>,
    pub boundary_mode: BoundaryMode,
}

impl TransferProduct {
    /// The product itself; overflows to infinity if it was rescaled far.
    pub fn unscaled(&self) -> Mat2 {
        self.matrix.scale(c(self.log_scale.exp(), 0.0))
    }

    /// `ln ‖T‖` in operator norm, valid even when rescaled.
    pub fn log_norm(&self) -> f64 {
        self.matrix.norm().ln() + self.log_scale
    }
}

fn column_block(model: &OneChannelModel, n: usize, z: C64, outer: bool) -> Result<Mat2> {
    let shell = model.shell(n)?;
    let (m, p) = (shell.index_minus, shell.index_plus);
    let size = shell.size;
    // inner: z(V − zP)⁻¹ restricted to Q; outer: (zV* − P)⁻¹ restricted to Q
    let a = if outer { shell.v.adjoint().scale(z) } else { shell.v.clone() };
    let mut a = a;
    let shift = if outer { c(1.0, 0.0) } else { z };
    for i in 0..size {
        if i != m && i != p {
            a[(i, i)] -= shift;
        }
    }
    let mut em = vec![C64::default(); size];
    em[m] = c(1.0, 0.0);
    let mut ep = vec![C64::default(); size];
    ep[p] = c(1.0, 0.0);
    let x = a.solve(&[em, ep], COND_LIMIT)?;
    let f = if outer { c(1.0, 0.0) } else { z };
    Ok(Mat2::new(x[0][m] * f, x[1][m] * f, x[0][p] * f, x[1][p] * f))
}

/// The outer block `Q*(zV* − P)⁻¹Q`, the inverse of the inner block.
pub fn outer_block(model: &OneChannelModel, n: usize, z: C64) -> Result<Mat2> {
    let shell = model.shell(n)?;
    if let Some(v) = shell.as_mat2() {
        return Ok(v.scale(z.inv()));
    }
    column_block(model, n, z, true)
}

/// The channel block `(α β; γ δ)_{z,n} = Q_n*(z⁻¹V_n − P_n)⁻¹Q_n`.
///
/// At `z = 0` this is the zero matrix; for `|z| > 1` it is computed as the
/// inverse of [`outer_block`].
pub fn channel_block(model: &OneChannelModel, n: usize, z: C64) -> Result<Mat2> {
    let shell = model.shell(n)?;
    if z == C64::default() {
        return Ok(Mat2::zero());
    }
    if let Some(v) = shell.as_mat2() {
        return Ok(v.adjoint().scale(z));
    }
    if z.norm() <= 1.0 {
        column_block(model, n, z, false)
    } else {
        outer_block(model, n, z)?.inverse().map_err(|_| Error::SingularResolvent { cond: f64::INFINITY })
    }
}

/// Closed form of `T♯` for a two-site shell `V = (𝔞 𝔟; 𝔠 𝔡)`.
pub fn t_sharp_zipper(v: &Mat2, z: C64) -> Option<Mat2> {
    let b = v.a12;
    if b.norm() <= BETA_REL_TOL {
        return None;
    }
    let bi = b.inv();
    let zi = z.inv();
    Some(Mat2::new(zi * (v.a21 - v.a22 * bi * v.a11), v.a22 * bi, -bi * v.a11, z * bi))
}

/// `T♯` through the channel block, without the zipper shortcut.
///
/// On the circle a shell mode that never reaches the channels makes the
/// in-shell solve singular at its eigenvalue; that angle is exceptional.
pub fn t_sharp_generic(model: &OneChannelModel, n: usize, z: C64) -> Result<Mat2> {
    let exceptional = || Error::ExceptionalPoint { level: n, z };
    let on_circle = (z.norm() - 1.0).abs() < 1e-12;
    if z.norm() <= 1.0 {
        let block = match channel_block(model, n, z) {
            Err(Error::SingularResolvent { .. }) if on_circle => return Err(exceptional()),
            other => other?,
        };
        let tol = BETA_REL_TOL * block.frobenius();
        phi_sharp(&block, tol).map_err(|_| exceptional())
    } else {
        let outer = outer_block(model, n, z)?;
        let tol = BETA_REL_TOL * outer.frobenius();
        phi_flat(&outer, tol).map_err(|_| exceptional())
    }
}

/// `T♯_{z,n}`; two-site shells use the closed form.
pub fn t_sharp(model: &OneChannelModel, n: usize, z: C64) -> Result<Mat2> {
    let shell = model.shell(n)?;
    if let Some(v) = shell.as_mat2() {
        return t_sharp_zipper(&v, z).ok_or(Error::ExceptionalPoint { level: n, z });
    }
    t_sharp_generic(model, n, z)
}

/// `T♭_n = φ♭(W_n)`, with `T♭_0 = I`.
pub fn t_flat(model: &OneChannelModel, n: usize) -> Result<Mat2> {
    if n == 0 {
        model.shell(0)?;
        return Ok(Mat2::identity());
    }
    let w = model.coupling(n)?;
    phi_flat(w, crate::model::CHANNEL_ZERO).map_err(|_| Error::ExceptionalPoint { level: n, z: C64::default() })
}

/// One step `T_{z,n} = T♯_{z,n} T♭_n`.
pub fn transfer_step(model: &OneChannelModel, n: usize, z: C64) -> Result<Mat2> {
    let s = t_sharp(model, n, z)?;
    if n == 0 {
        Ok(s)
    } else {
        Ok(s * t_flat(model, n)?)
    }
}

fn absorbed(u: C64) -> Mat2 {
    Mat2::diag(c(1.0, 0.0), u.inv())
}

/// `T_{z,[0,N]}`, optionally right-multiplied by `diag(1, u⁻¹)`.
///
/// An exceptional point at some level sets the `exceptional` flag instead of failing.
pub fn transfer_product(model: &OneChannelModel, z: C64, level: usize, absorb_boundary: bool) -> Result<TransferProduct> {
    model.shell(level)?;
    let mut t = if absorb_boundary { absorbed(model.u()) } else { Mat2::identity() };
    let mut log_scale = 0.0;
    let mut out = TransferProduct {
        z,
        n: level,
        matrix: t,
        log_scale,
        exceptional: false,
        exceptional_level: None,
        boundary_mode: if absorb_boundary { BoundaryMode::AbsorbedU } else { BoundaryMode::None },
    };
    for n in 0..=level {
        match transfer_step(model, n, z) {
            Ok(step) => t = step * t,
            Err(Error::ExceptionalPoint { level, .. }) => {
                out.exceptional = true;
                out.exceptional_level = Some(level);
                return Ok(out);
            }
            Err(e) => return Err(e),
        }
        let nrm = t.norm();
        if nrm > RESCALE_AT {
            t = t.scale(c(1.0 / nrm, 0.0));
            log_scale += nrm.ln();
        }
    }
    out.matrix = t;
    out.log_scale = log_scale;
    Ok(out)
}

/// Channel pairs `(Φ_{(n,+)}, Ψ_{(n,+)})` for `n = −1, 0, …, N` of the
/// generalized eigenfunction with boundary `u`, seeded by `(u, 1)`.
pub fn solution_samples(model: &OneChannelModel, z: C64, level: usize, u: C64) -> Result<Vec<[C64; 2]>> {
    model.shell(level)?;
    let mut out = Vec::with_capacity(level + 2);
    let mut s = [u, c(1.0, 0.0)];
    out.push(s);
    for n in 0..=level {
        s = transfer_step(model, n, z)?.apply(s);
        out.push(s);
    }
    Ok(out)
}

/// Exceptional angles found by [`exceptional_angles`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExceptionalSet {
    /// Disjoint angle brackets `[lo, hi]` of width ≤ 1e-10 around zeros of some β.
    pub intervals: Vec<(f64, f64)>,
    /// Levels where β vanishes identically, i.e. (A1) fails.
    pub structural: Vec<usize>,
}

impl ExceptionalSet {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.structural.is_empty()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.intervals.iter().map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

/// Accept a refined minimum of |β|/‖block‖ below this as a genuine zero.
const ZERO_ACCEPT: f64 = 1e-7;

fn beta_ratio(model: &OneChannelModel, n: usize, phi: f64) -> f64 {
    match channel_block(model, n, cis(phi)) {
        Ok(b) => b.a12.norm() / b.frobenius().max(f64::MIN_POSITIVE),
        Err(_) => f64::NAN,
    }
}

/// Angles in `[0, 2π)` where some `β_{e^{iφ},n}`, `n ≤ N`, vanishes.
///
/// Two-site shells are skipped: there β is the constant `e^{iφ}𝔟̄`-type entry
/// and cannot vanish unless (A1) fails, which is reported as structural.
pub fn exceptional_angles(model: &OneChannelModel, level: usize, grid_size: usize) -> Result<ExceptionalSet> {
    model.shell(level)?;
    let grid_size = grid_size.max(16);
    let mut set = ExceptionalSet::default();
    let h = TAU / grid_size as f64;
    for n in 0..=level {
        if !crate::model::validate_a1(model, n)? {
            set.structural.push(n);
            continue;
        }
        if model.shell(n)?.is_zipper() {
            continue;
        }
        let grid = angle_grid(grid_size, 0.0);
        let vals: Vec<f64> = grid.iter().map(|&p| beta_ratio(model, n, p)).collect();
        for i in 0..grid_size {
            let prev = vals[(i + grid_size - 1) % grid_size];
            let next = vals[(i + 1) % grid_size];
            let v = vals[i];
            if v.is_nan() {
                // singular in-shell solve: a decoupled eigenvalue sits on this node
                set.intervals.push((grid[i], grid[i]));
                continue;
            }
            if !(v <= prev && v < next) {
                continue;
            }
            let (lo, hi, best) = golden_min(|p| beta_ratio(model, n, p), grid[i] - h, grid[i] + h, 1e-10);
            if best < ZERO_ACCEPT {
                let shift = (0.5 * (lo + hi)).div_euclid(TAU) * TAU;
                set.intervals.push((lo - shift, hi - shift));
            }
        }
    }
    set.intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    set.intervals.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9);
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat2core::{haar_u2, u11_defect, MatN};
    use crate::model::{build_qw1d, build_zipper, OneChannelModel, Shell, ZipperSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn one() -> C64 {
        c(1.0, 0.0)
    }

    fn all_swap(n: usize) -> OneChannelModel {
        build_zipper(&ZipperSpec { v: vec![Mat2::swap(); n + 1], w: vec![Mat2::swap(); n] }, one()).unwrap()
    }

    #[test]
    fn swap_block_on_circle() {
        let z = cis(PI / 3.0);
        let m = all_swap(0);
        let b = channel_block(&m, 0, z).unwrap();
        assert!(b.max_abs_diff(&Mat2::swap().scale(z)) < 1e-15);
    }

    #[test]
    fn theta_zipper_sharp_closed_form() {
        let th = 0.7;
        let m = build_zipper(&ZipperSpec { v: vec![Mat2::reflection(th)], w: vec![] }, one()).unwrap();
        for phi in [0.0, 1.0, 2.5, 4.0] {
            let z = cis(phi);
            let want = Mat2::new(z.inv() / th.sin(), c(-1.0 / th.tan(), 0.0), c(-1.0 / th.tan(), 0.0), z / th.sin());
            assert!(t_sharp(&m, 0, z).unwrap().max_abs_diff(&want) < 1e-14);
            assert!(t_sharp_generic(&m, 0, z).unwrap().max_abs_diff(&want) < 1e-12);
        }
    }

    #[test]
    fn swap_shell_sharp_is_diagonal() {
        let z = c(0.3, -0.8);
        let got = t_sharp(&all_swap(0), 0, z).unwrap();
        assert!(got.max_abs_diff(&Mat2::diag(z.inv(), z)) < 1e-15);
    }

    #[test]
    fn hadamard_step_at_one() {
        let m = build_qw1d(&[Mat2::hadamard(); 2], one()).unwrap();
        let s2 = 2f64.sqrt();
        let want = Mat2::real(s2, -1.0, 1.0, -s2);
        assert!(transfer_step(&m, 1, one()).unwrap().max_abs_diff(&want) < 1e-14);
        // for walks T_{z,n} = φ♭(z⁻¹V_n)
        let z = cis(0.4);
        let v = Mat2::swap() * Mat2::hadamard();
        let want = phi_flat(&v.scale(z.inv()), 1e-12).unwrap();
        assert!(transfer_step(&m, 1, z).unwrap().max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn flat_examples() {
        let (al, be) = (0.4, -1.1);
        let w = Mat2::new(c(0.0, 0.0), cis(al), cis(be), c(0.0, 0.0));
        let spec = ZipperSpec { v: vec![Mat2::hadamard(); 2], w: vec![w] };
        let m = build_zipper(&spec, one()).unwrap();
        assert!(t_flat(&m, 1).unwrap().max_abs_diff(&Mat2::diag(cis(be), cis(-al))) < 1e-15);
        let m = build_zipper(&ZipperSpec { v: vec![Mat2::hadamard(); 2], w: vec![Mat2::identity()] }, one()).unwrap();
        assert!(matches!(t_flat(&m, 1), Err(Error::ExceptionalPoint { level: 1, .. })));
        assert_eq!(t_flat(&all_swap(2), 2).unwrap(), Mat2::identity());
    }

    #[test]
    fn product_examples() {
        let t = transfer_product(&all_swap(0), c(0.0, 1.0), 0, false).unwrap();
        assert!(t.matrix.max_abs_diff(&Mat2::diag(c(0.0, -1.0), c(0.0, 1.0))) < 1e-15);
        let z = c(0.6, 0.5);
        let t = transfer_product(&all_swap(7), z, 7, false).unwrap();
        assert!(t.matrix.max_abs_diff(&Mat2::diag(z.powi(-8), z.powi(8))) < 1e-12);
        let h = build_qw1d(&[Mat2::hadamard(); 51], one()).unwrap();
        // φ = 0.3 lies in a band of the Hadamard walk
        let t = transfer_product(&h, cis(0.3), 50, false).unwrap();
        assert!(u11_defect(&t.matrix) < 1e-8);
    }

    #[test]
    fn product_flags_exceptional_levels() {
        let spec = ZipperSpec { v: vec![Mat2::hadamard(), Mat2::identity()], w: vec![Mat2::swap()] };
        let m = build_zipper(&spec, one()).unwrap();
        let t = transfer_product(&m, cis(0.2), 1, false).unwrap();
        assert!(t.exceptional);
        assert_eq!(t.exceptional_level, Some(1));
    }

    #[test]
    fn rescaling_keeps_log_norm() {
        // strongly hyperbolic steps
        let v = Mat2::reflection(0.01);
        let m = build_zipper(&ZipperSpec { v: vec![v; 400], w: vec![Mat2::swap(); 399] }, one()).unwrap();
        let t = transfer_product(&m, one(), 399, false).unwrap();
        assert!(t.log_scale > 0.0);
        assert!(t.matrix.is_finite());
        let t40 = transfer_product(&m, one(), 39, false).unwrap();
        // Lyapunov growth per step is the same, so ln‖T‖ scales ~ linearly
        let ratio = t.log_norm() / t40.log_norm();
        assert!((ratio - 10.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn samples_of_all_swap() {
        let phi = 0.9;
        let u = cis(0.3);
        let s = solution_samples(&all_swap(5), cis(phi), 5, u).unwrap();
        assert_eq!(s[0], [u, one()]);
        for (k, pair) in s.iter().enumerate().skip(1) {
            let n = (k - 1) as f64;
            assert!((pair[0] - u * cis(-phi * (n + 1.0))).norm() < 1e-13);
            assert!((pair[1] - cis(phi * (n + 1.0))).norm() < 1e-13);
        }
    }

    #[test]
    fn zipper_closed_form_matches_generic_on_random_shells() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let v = haar_u2(&mut rng);
            let m = build_zipper(&ZipperSpec { v: vec![v], w: vec![] }, one()).unwrap();
            let z = cis(rand::Rng::random_range(&mut rng, 0.0..TAU));
            let a = t_sharp(&m, 0, z).unwrap();
            let b = t_sharp_generic(&m, 0, z).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10 * a.frobenius());
        }
    }

    #[test]
    fn block_vanishes_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let v = crate::mat2core::haar_unitary(4, &mut rng);
        let m = OneChannelModel::new(vec![Shell::new(v, 0, 2).unwrap()], vec![], one()).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..=4 {
            let nrm = channel_block(&m, 0, c(10f64.powi(-k), 0.0)).unwrap().norm();
            assert!(nrm < last);
            last = nrm;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn decoupled_shell_mode_is_exceptional() {
        // 4-ring hopping has a zero mode vanishing on sites 0 and 2
        // exp(itA) = e^{2it}P₊ + e^{-2it}P₋ + (I − P₊ − P₋)
        let t = 0.8;
        let sign = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
        let v = MatN::from_fn(4, |i, j| {
            let id = if i == j { one() } else { c(0.0, 0.0) };
            let plus = 0.25 * (cis(2.0 * t) - one());
            let minus = 0.25 * sign(i) * sign(j) * (cis(-2.0 * t) - one());
            id + plus + minus
        });
        let m = OneChannelModel::new(vec![Shell::new(v, 0, 2).unwrap()], vec![], one()).unwrap();
        let t = transfer_product(&m, one(), 0, false).unwrap();
        assert!(t.exceptional);
        assert_eq!(t.exceptional_level, Some(0));
        let set = exceptional_angles(&m, 0, 64).unwrap();
        assert!(set.intervals.iter().any(|&(lo, hi)| lo <= 0.0 && hi >= 0.0));
        assert!(!transfer_product(&m, cis(0.3), 0, false).unwrap().exceptional);
    }

    #[test]
    fn zipper_has_no_exceptional_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let v: Vec<Mat2> = (0..4).map(|_| haar_u2(&mut rng)).collect();
        let w: Vec<Mat2> = (0..3).map(|_| haar_u2(&mut rng)).collect();
        let m = build_zipper(&ZipperSpec { v, w }, one()).unwrap();
        assert!(exceptional_angles(&m, 3, 64).unwrap().is_empty());
    }

    #[test]
    fn disconnected_shell_is_structural() {
        let mut v = MatN::identity(3);
        v[(1, 1)] = c(0.0, 0.0);
        v[(1, 2)] = c(1.0, 0.0);
        v[(2, 1)] = c(1.0, 0.0);
        v[(2, 2)] = c(0.0, 0.0);
        let m = OneChannelModel::new(vec![Shell::new(v, 0, 2).unwrap()], vec![], one()).unwrap();
        let set = exceptional_angles(&m, 0, 64).unwrap();
        assert_eq!(set.structural, vec![0]);
        assert!(set.intervals.is_empty());
    }
}
