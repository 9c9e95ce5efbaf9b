//! Periodic scattering zippers: monodromy, bands, band edges, isolated
//! eigenvalues and the diagonalisation used by the random perturbations.

use crate::error::{Error, Result};
use crate::mat2core::{c, cis, normalize_phase, phi_flat, u11_eigensystem, Mat2, C64};
use crate::model::{build_zipper, OneChannelModel, ZipperSpec, CHANNEL_ZERO, UNITARY_TOL};
use crate::numeric::{angle_distance, angle_grid, bisect, golden_min, wrap_angle, TAU};
use crate::transfer::t_sharp_zipper;
use rayon::prelude::*;
use std::io::Write;

/// Smallest scan grid accepted by [`band_set`].
pub const MIN_GRID: usize = 256;
/// Largest grid the band scan doubles up to.
pub const MAX_GRID: usize = 1 << 17;
/// Contraction margin for accepting an isolated eigenvalue.
pub const CONTRACTION_MARGIN: f64 = 1e-6;
/// Distance below `D = 4` that [`diagonalize_monodromy`] requires.
pub const EDGE_MARGIN: f64 = 1e-6;

/// A zipper with `V_{n+p} = V_n`, `W_{n+p} = W_n` for `n ≥ 1` and its own `V_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicZipper {
    pub v0: Mat2,
    /// `V_1, …, V_p`.
    pub v: Vec<Mat2>,
    /// `W_1, …, W_p`.
    pub w: Vec<Mat2>,
    pub u: C64,
}

fn check_block(m: &Mat2, what: &str) -> Result<()> {
    let defect = m.unitary_defect();
    if !(defect < UNITARY_TOL) {
        return Err(Error::NonUnitary { what: what.into(), defect });
    }
    Ok(())
}

impl PeriodicZipper {
    /// Validated constructor: unitary blocks with nonvanishing upper-right entries.
    pub fn new(v0: Mat2, v: Vec<Mat2>, w: Vec<Mat2>, u: C64) -> Result<Self> {
        if v.is_empty() || v.len() != w.len() {
            return Err(Error::ShapeMismatch(format!("period needs matching V and W lists, got {} and {}", v.len(), w.len())));
        }
        if !((u.norm() - 1.0).abs() < UNITARY_TOL) {
            return Err(Error::Config(format!("boundary phase must have modulus 1, got {}", u.norm())));
        }
        check_block(&v0, "V_0")?;
        if v0.a12.norm() <= CHANNEL_ZERO {
            return Err(Error::A1Failure { level: 0 });
        }
        for (k, (vk, wk)) in v.iter().zip(&w).enumerate() {
            check_block(vk, "V_n")?;
            check_block(wk, "W_n")?;
            if vk.a12.norm() <= CHANNEL_ZERO {
                return Err(Error::A1Failure { level: k + 1 });
            }
            if wk.a12.norm() <= CHANNEL_ZERO {
                return Err(Error::A2Failure { level: k + 1 });
            }
        }
        Ok(PeriodicZipper { v0, v, w, u })
    }

    /// Period one with `V_0 = V`.
    pub fn uniform(v: Mat2, w: Mat2, u: C64) -> Result<Self> {
        Self::new(v, vec![v], vec![w], u)
    }

    /// `V = (cos θ, sin θ; sin θ, −cos θ)`, `W = swap`, `u = 1`.
    pub fn theta(theta: f64) -> Result<Self> {
        Self::uniform(Mat2::reflection(theta), Mat2::swap(), c(1.0, 0.0))
    }

    pub fn period(&self) -> usize {
        self.v.len()
    }

    /// Blocks at level `n ≥ 1`.
    pub fn block(&self, n: usize) -> (Mat2, Mat2) {
        let k = (n - 1) % self.period();
        (self.v[k], self.w[k])
    }

    /// The same zipper with a different `V_0`.
    pub fn with_v0(&self, v0: Mat2) -> Result<Self> {
        Self::new(v0, self.v.clone(), self.w.clone(), self.u)
    }

    /// The zipper listed as blocks for levels `0..=levels`.
    pub fn spec(&self, levels: usize) -> ZipperSpec {
        let mut v = vec![self.v0];
        let mut w = Vec::with_capacity(levels);
        for n in 1..=levels {
            let (vn, wn) = self.block(n);
            v.push(vn);
            w.push(wn);
        }
        ZipperSpec { v, w }
    }

    /// The truncation to levels `0..=levels` as a one-channel model.
    pub fn to_model(&self, levels: usize) -> Result<OneChannelModel> {
        build_zipper(&self.spec(levels), self.u)
    }

    /// Smallest `|𝔟|`, `|b|` over the blocks.
    pub fn min_channel_entry(&self) -> f64 {
        self.v.iter().chain(&self.w).chain(std::iter::once(&self.v0)).map(|m| m.a12.norm()).fold(f64::INFINITY, f64::min)
    }
}

fn step(v: &Mat2, w: &Mat2, z: C64) -> Mat2 {
    // validation keeps 𝔟 and b away from zero, so both closed forms exist
    let sharp = t_sharp_zipper(v, z).expect("validated block");
    let flat = phi_flat(w, 0.0).expect("validated coupling");
    sharp * flat
}

/// `T_{z,0}` for the zipper.
pub fn initial_transfer(zipper: &PeriodicZipper, z: C64) -> Mat2 {
    t_sharp_zipper(&zipper.v0, z).expect("validated block")
}

/// One-period transfer matrix `T_z = T_{z,p}⋯T_{z,1}`.
pub fn monodromy(zipper: &PeriodicZipper, z: C64) -> Mat2 {
    let mut t = Mat2::identity();
    for (v, w) in zipper.v.iter().zip(&zipper.w) {
        t = step(v, w, z) * t;
    }
    t
}

/// `(Tr T_z)²/det T_z` at `z = e^{iφ}`; real on the circle.
pub fn discriminant(zipper: &PeriodicZipper, phi: f64) -> Result<f64> {
    let t = monodromy(zipper, cis(phi));
    let tr = t.trace();
    let d = tr * tr / t.det();
    // rounding in Tr² grows like ε‖T‖⁴ once the product is large
    let scale = t.frobenius().powi(2);
    if !(d.im.abs() < 1e-9 * d.norm().max(1.0) + 1e-12 * scale * scale) {
        return Err(Error::NonRealDiscriminant { imag: d.im });
    }
    Ok(d.re)
}

/// An isolated eigenvalue `e^{iφ}` of the half-line operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEigenvalue {
    pub angle: f64,
    /// `|λ_z|`, the per-period decay factor of the eigenvector.
    pub contraction: f64,
    /// Mass of the eigenvalue in the spectral measure of `e_{(0,−)}`.
    pub weight: f64,
}

/// Bands `Σ = {|Tr T_z| < 2}`, their edges and the isolated eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSet {
    /// Open arcs `(start, end)` with `start ∈ [0, 2π)` and `start < end ≤ start + 2π`.
    pub arcs: Vec<(f64, f64)>,
    /// Angles in `[0, 2π)` where `|Tr T_z| = 2`, sorted.
    pub edges: Vec<f64>,
    pub point_spectrum: Vec<PointEigenvalue>,
}

impl BandSet {
    /// Distance from `phi` to the union of closed arcs.
    pub fn distance(&self, phi: f64) -> f64 {
        self.arcs
            .iter()
            .map(|&(a, b)| {
                let x = a + (phi - a).rem_euclid(TAU);
                if x <= b {
                    0.0
                } else {
                    angle_distance(phi, a).min(angle_distance(phi, b))
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn in_closure(&self, phi: f64) -> bool {
        self.distance(phi) == 0.0
    }

    /// Total length of the arcs.
    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    /// CSV with header `arc_start,arc_end`.
    pub fn write_arcs_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "arc_start,arc_end")?;
        for (a, b) in &self.arcs {
            writeln!(out, "{a:.16e},{b:.16e}")?;
        }
        Ok(())
    }

    /// CSV with header `eig_angle,contraction`.
    pub fn write_point_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "eig_angle,contraction")?;
        for e in &self.point_spectrum {
            writeln!(out, "{:.16e},{:.16e}", e.angle, e.contraction)?;
        }
        Ok(())
    }
}

/// Band edges of `D − 4` on a grid of `size` points: sign changes bisected,
/// plus points where `D` touches 4 from below without crossing.
fn scan_edges(zipper: &PeriodicZipper, size: usize, tol: f64) -> Result<Vec<f64>> {
    let grid = angle_grid(size, 0.0);
    let h = TAU / size as f64;
    let s: Vec<f64> = grid.par_iter().map(|&p| discriminant(zipper, p).map(|d| d - 4.0)).collect::<Result<_>>()?;
    let f = |p: f64| discriminant(zipper, p).map(|d| d - 4.0).unwrap_or(f64::NAN);
    let mut edges = Vec::new();
    for i in 0..size {
        let j = (i + 1) % size;
        let lo = grid[i];
        let hi = lo + h;
        if s[i] == 0.0 {
            edges.push(lo);
        } else if s[j] != 0.0 && (s[i] < 0.0) != (s[j] < 0.0) {
            edges.push(wrap_angle(bisect(f, lo, hi, tol)));
        }
        // local maximum below zero: D may touch 4 between nodes
        let prev = s[(i + size - 1) % size];
        if s[i] < 0.0 && s[i] >= prev && s[i] >= s[j] {
            let (a, b, best) = golden_min(|p| -f(p), lo - h, hi, tol);
            if -best > -1e-12 * 4.0 {
                edges.push(wrap_angle(0.5 * (a + b)));
            }
        }
    }
    edges.sort_by(|a, b| a.total_cmp(b));
    edges.dedup_by(|a, b| angle_distance(*a, *b) < 10.0 * tol);
    if edges.len() > 1 && angle_distance(edges[0], *edges.last().unwrap()) < 10.0 * tol {
        edges.pop();
    }
    Ok(edges)
}

/// Bands of the zipper together with its isolated eigenvalues.
///
/// The scan starts at `max(grid, 2048)` points and doubles until the edge
/// count agrees on three consecutive grids.
pub fn band_set(zipper: &PeriodicZipper, grid: usize, tol: f64) -> Result<BandSet> {
    if grid < MIN_GRID {
        return Err(Error::Config(format!("band scan grid must be at least {MIN_GRID}, got {grid}")));
    }
    let mut size = grid.max(2048);
    let mut edges = scan_edges(zipper, size, tol)?;
    let mut stable = 0;
    while stable < 2 && size < MAX_GRID {
        size *= 2;
        let next = scan_edges(zipper, size, tol)?;
        stable = if next.len() == edges.len() { stable + 1 } else { 0 };
        edges = next;
    }
    let arcs = if edges.is_empty() {
        if discriminant(zipper, 0.0)? < 4.0 {
            vec![(0.0, TAU)]
        } else {
            vec![]
        }
    } else {
        let k = edges.len();
        (0..k)
            .filter_map(|i| {
                let a = edges[i];
                let b = if i + 1 < k { edges[i + 1] } else { edges[0] + TAU };
                let mid = discriminant(zipper, 0.5 * (a + b)).ok()?;
                (mid < 4.0).then_some((a, b))
            })
            .collect()
    };
    if arcs.is_empty() {
        return Err(Error::EmptyBandSet);
    }
    let point_spectrum = point_spectrum(zipper, zipper.u, size.min(1 << 14))?;
    Ok(BandSet { arcs, edges, point_spectrum })
}

/// Seed `w_z = T_{z,0}(u;1)` and the normalised monodromy at `e^{iφ}`.
fn root_function(zipper: &PeriodicZipper, u: C64, phi: f64) -> f64 {
    let z = cis(phi);
    let t = monodromy(zipper, z);
    let w = initial_transfer(zipper, z).apply([u, c(1.0, 0.0)]);
    let tw = t.apply(w);
    let det = tw[0] * w[1] - tw[1] * w[0];
    // T = e^{iχ}(a b; b̄ ā) and w is null, so det(Tw, w)/(2i e^{iχ} w₁w₂) is real
    let e = t.det().sqrt();
    let val = det / (c(0.0, 2.0) * e * w[0] * w[1]);
    val.re / t.norm()
}

fn rayleigh(t: &Mat2, w: [C64; 2]) -> C64 {
    let tw = t.apply(w);
    (w[0].conj() * tw[0] + w[1].conj() * tw[1]) / (w[0].norm_sqr() + w[1].norm_sqr())
}

/// Mass of the eigenvalue at `z` in the spectral measure of `e_{(0,−)}`,
/// summing the eigenfunction over one period and the geometric tail.
fn eigen_weight(zipper: &PeriodicZipper, u: C64, z: C64, lambda: f64) -> f64 {
    // (Ψ_{(0,−)}; Φ_{(0,−)}) = (u; 1)
    let mut state = initial_transfer(zipper, z).apply([u, c(1.0, 0.0)]);
    let head = u.norm_sqr() + state[1].norm_sqr();
    let mut period = 0.0;
    for (v, w) in zipper.v.iter().zip(&zipper.w) {
        let minus = phi_flat(w, 0.0).expect("validated coupling").apply(state);
        state = t_sharp_zipper(v, z).expect("validated block").apply(minus);
        period += minus[0].norm_sqr() + state[1].norm_sqr();
    }
    1.0 / (head + period / (1.0 - lambda * lambda))
}

/// Isolated eigenvalues outside the closed bands: zeros of the root function
/// along which the seed is the contracting eigenvector of `T_z`.
pub fn point_spectrum(zipper: &PeriodicZipper, u: C64, scan_grid: usize) -> Result<Vec<PointEigenvalue>> {
    let size = scan_grid.max(MIN_GRID);
    let grid = angle_grid(size, 0.0);
    let h = TAU / size as f64;
    let f: Vec<f64> = grid.par_iter().map(|&p| root_function(zipper, u, p)).collect();
    let mut out: Vec<PointEigenvalue> = Vec::new();
    for i in 0..size {
        let (a, b) = (f[i], f[(i + 1) % size]);
        if !(a.is_finite() && b.is_finite()) || (a < 0.0) == (b < 0.0) && a != 0.0 {
            continue;
        }
        let phi = wrap_angle(bisect(|p| root_function(zipper, u, p), grid[i], grid[i] + h, 1e-12));
        // a branch flip of the square root also changes sign, but not through zero
        if !(root_function(zipper, u, phi).abs() < 1e-6) {
            continue;
        }
        let z = cis(phi);
        let t = monodromy(zipper, z);
        let w = initial_transfer(zipper, z).apply([u, c(1.0, 0.0)]);
        let lam = rayleigh(&t, w).norm();
        if !(lam < 1.0 - CONTRACTION_MARGIN) {
            continue;
        }
        if out.iter().any(|e| angle_distance(e.angle, phi) < 1e-8) {
            continue;
        }
        out.push(PointEigenvalue { angle: phi, contraction: lam, weight: eigen_weight(zipper, u, z, lam) });
    }
    out.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    Ok(out)
}

/// `M⁻¹T_zM = R` with `R` diagonal unimodular, for `e^{iφ}` inside a band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagonalization {
    /// Unit eigenvectors as columns.
    pub m: Mat2,
    pub r: Mat2,
    /// `‖M‖·‖M⁻¹‖`.
    pub condition: f64,
}

pub fn diagonalize_monodromy(zipper: &PeriodicZipper, phi: f64) -> Result<Diagonalization> {
    let d = discriminant(zipper, phi)?;
    if !(d < 4.0 - EDGE_MARGIN) {
        return Err(Error::NearBandEdge { phi, disc: d });
    }
    let t = monodromy(zipper, cis(phi));
    let es = u11_eigensystem(&t, 1e-8)?;
    let (mut e1, mut e2) = (es.eigvec_minus, es.eigvec_plus);
    let (mut l1, mut l2) = (es.eigenvalue_minus(), es.eigenvalue_plus());
    // order the columns so that M is as close to the identity as possible
    if e1[0].norm() < e2[0].norm() {
        std::mem::swap(&mut e1, &mut e2);
        std::mem::swap(&mut l1, &mut l2);
    }
    let e2 = normalize_phase([e2[1], e2[0]]);
    let m = Mat2::new(e1[0], e2[1], e1[1], e2[0]);
    let r = Mat2::diag(l1, l2);
    let (smax, smin) = m.singular_values();
    Ok(Diagonalization { m, r, condition: smax / smin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::{assemble, unitary_eigen};
    use crate::mat2core::{haar_u2, u11_defect};
    use crate::transfer::transfer_product;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_zipper(p: usize, seed: u64) -> PeriodicZipper {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v0 = haar_u2(&mut rng);
        let v = (0..p).map(|_| haar_u2(&mut rng)).collect();
        let w = (0..p).map(|_| haar_u2(&mut rng)).collect();
        PeriodicZipper::new(v0, v, w, c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn theta_monodromy_closed_form() {
        let th: f64 = 0.9;
        let z = cis(1.3);
        let want = Mat2::new(z.inv() / th.sin(), c(-1.0 / th.tan(), 0.0), c(-1.0 / th.tan(), 0.0), z / th.sin());
        assert!(monodromy(&PeriodicZipper::theta(th).unwrap(), z).max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn monodromy_in_u11_on_circle() {
        for seed in 0..20 {
            let zp = random_zipper(3, seed);
            for phi in angle_grid(50, 0.01) {
                let t = monodromy(&zp, cis(phi));
                assert!(u11_defect(&t) < 1e-10 * t.frobenius().powi(2).max(1.0));
            }
        }
    }

    #[test]
    fn doubled_period_squares_monodromy() {
        let zp = random_zipper(1, 3);
        let doubled = PeriodicZipper::new(zp.v0, vec![zp.v[0]; 2], vec![zp.w[0]; 2], zp.u).unwrap();
        let z = cis(0.4);
        let t = monodromy(&zp, z);
        assert!(monodromy(&doubled, z).max_abs_diff(&(t * t)) < 1e-13);
    }

    #[test]
    fn theta_discriminant() {
        let th = PI / 6.0;
        let zp = PeriodicZipper::theta(th).unwrap();
        for phi in angle_grid(64, 0.0) {
            let want = 4.0 * phi.cos().powi(2) / th.sin().powi(2);
            assert!((discriminant(&zp, phi).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn discriminant_is_real() {
        for seed in 0..10 {
            let zp = random_zipper(2, 100 + seed);
            for phi in angle_grid(4096, 0.0) {
                discriminant(&zp, phi).unwrap();
            }
        }
    }

    #[test]
    fn theta_bands() {
        for th in [PI / 6.0, PI / 4.0, PI / 3.0] {
            let bs = band_set(&PeriodicZipper::theta(th).unwrap(), 2048, 1e-10).unwrap();
            let e = th.sin().acos();
            let want = [e, PI - e, PI + e, TAU - e];
            assert_eq!(bs.edges.len(), 4);
            for (a, b) in bs.edges.iter().zip(want) {
                assert!((a - b).abs() < 1e-9, "{:?}", bs.edges);
            }
            assert_eq!(bs.arcs, vec![(bs.edges[0], bs.edges[1]), (bs.edges[2], bs.edges[3])]);
        }
    }

    #[test]
    fn half_pi_bands_touch() {
        let bs = band_set(&PeriodicZipper::theta(PI / 2.0).unwrap(), 2048, 1e-10).unwrap();
        assert_eq!(bs.arcs.len(), 2);
        assert!(bs.arcs[0].0.abs() < 1e-9 && (bs.arcs[0].1 - PI).abs() < 1e-9);
        assert!((bs.arcs[1].0 - PI).abs() < 1e-9 && (bs.arcs[1].1 - TAU).abs() < 1e-9);
    }

    #[test]
    fn touching_edge_between_nodes() {
        // shift θ = π/2 bands off the grid with a phase in V
        let v = Mat2::diag(cis(0.123), c(1.0, 0.0)) * Mat2::swap();
        let zp = PeriodicZipper::uniform(v, Mat2::swap(), c(1.0, 0.0)).unwrap();
        let bs = band_set(&zp, 256, 1e-10).unwrap();
        assert_eq!(bs.arcs.len(), 2, "{:?}", bs.arcs);
        assert!((bs.measure() - TAU).abs() < 1e-8);
    }

    #[test]
    fn undefected_theta_zipper_eigenvalue() {
        let th = PI / 6.0;
        let pts = point_spectrum(&PeriodicZipper::theta(th).unwrap(), c(1.0, 0.0), 4096).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].angle.abs() < 1e-9 || (pts[0].angle - TAU).abs() < 1e-9);
        assert!((pts[0].contraction - (2.0 - 3f64.sqrt())).abs() < 1e-8);
        assert!((pts[0].weight - 0.75f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn defect_eigenvalue_matches_truncation() {
        let base = PeriodicZipper::theta(PI / 6.0).unwrap();
        let zp = base.with_v0(Mat2::diag(cis(1.0), c(1.0, 0.0)) * base.v0).unwrap();
        let pts = point_spectrum(&zp, zp.u, 4096).unwrap();
        assert!(!pts.is_empty());
        let op = assemble(&zp.to_model(120).unwrap(), 120, zp.u, c(1.0, 0.0), false).unwrap();
        let (angles, _) = unitary_eigen(&op.matrix).unwrap();
        for e in &pts {
            let best = angles.iter().map(|a| angle_distance(*a, e.angle)).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "{} {best}", e.angle);
        }
        let doubled = point_spectrum(&zp, zp.u, 8192).unwrap();
        assert_eq!(doubled.len(), pts.len());
    }

    #[test]
    fn eigen_weight_matches_truncation() {
        let base = PeriodicZipper::theta(PI / 6.0).unwrap();
        let zp = base.with_v0(Mat2::diag(cis(1.0), c(1.0, 0.0)) * base.v0).unwrap();
        let pts = point_spectrum(&zp, zp.u, 4096).unwrap();
        let op = assemble(&zp.to_model(120).unwrap(), 120, zp.u, c(1.0, 0.0), false).unwrap();
        let mu = crate::finite::spectral_measure(&op).unwrap();
        for e in pts {
            let w: f64 = mu.iter().filter(|(a, _)| angle_distance(*a, e.angle) < 1e-6).map(|(_, w)| w).sum();
            assert!((w - e.weight).abs() < 1e-8, "{w} {}", e.weight);
        }
    }

    #[test]
    fn periodicity_identity() {
        let zp = random_zipper(2, 7);
        let model = zp.to_model(100).unwrap();
        let z = cis(0.77);
        let t = monodromy(&zp, z);
        let mut pow = initial_transfer(&zp, z);
        for n in 1..=50 {
            pow = t * pow;
            let prod = transfer_product(&model, z, 2 * n, false).unwrap().unscaled();
            assert!(prod.max_abs_diff(&pow) < 1e-8 * n as f64 * pow.norm().max(1.0));
        }
    }

    #[test]
    fn eigenvalue_moduli_follow_bands() {
        let zp = random_zipper(2, 8);
        let bs = band_set(&zp, 2048, 1e-10).unwrap();
        for phi in angle_grid(500, 0.001) {
            let es = u11_eigensystem(&monodromy(&zp, cis(phi)), 1e-8).unwrap();
            let d = discriminant(&zp, phi).unwrap();
            if bs.distance(phi) == 0.0 && d < 4.0 - 1e-6 {
                assert!((es.lambda.norm() - 1.0).abs() < 1e-8);
            } else if bs.distance(phi) > 1e-3 {
                assert!(es.lambda.norm() < 1.0 - 1e-6);
            }
        }
    }

    #[test]
    fn diagonal_monodromy_at_half_pi() {
        let d = diagonalize_monodromy(&PeriodicZipper::theta(PI / 2.0).unwrap(), PI / 2.0).unwrap();
        assert!(d.m.max_abs_diff(&Mat2::identity()) < 1e-12);
        assert!(d.r.max_abs_diff(&Mat2::diag(cis(-PI / 2.0), cis(PI / 2.0))) < 1e-12);
        assert!((d.condition - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonalization_is_exact_in_bands() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut done = 0;
        while done < 1000 {
            let zp = random_zipper(1 + done % 3, 1000 + done as u64);
            let phi = rand::Rng::random_range(&mut rng, 0.0..TAU);
            if discriminant(&zp, phi).unwrap() > 4.0 - 1e-3 {
                continue;
            }
            let d = diagonalize_monodromy(&zp, phi).unwrap();
            let r = d.m.inverse().unwrap() * monodromy(&zp, cis(phi)) * d.m;
            assert!(r.a12.norm() < 1e-9 && r.a21.norm() < 1e-9);
            assert!((r.a11.norm() - 1.0).abs() < 1e-9 && (r.a22.norm() - 1.0).abs() < 1e-9);
            done += 1;
        }
    }

    #[test]
    fn conditioning_grows_towards_edge() {
        let zp = PeriodicZipper::theta(PI / 6.0).unwrap();
        let edge = PI / 3.0;
        let conds: Vec<f64> = [0.3, 0.1, 0.03, 0.01, 0.003].iter().map(|d| diagonalize_monodromy(&zp, edge + d).unwrap().condition).collect();
        assert!(conds.windows(2).all(|w| w[1] > w[0]), "{conds:?}");
        assert!(matches!(diagonalize_monodromy(&zp, edge + 1e-9), Err(Error::NearBandEdge { .. })));
    }

    #[test]
    fn rejects_vanishing_channel() {
        assert!(matches!(
            PeriodicZipper::uniform(Mat2::identity(), Mat2::swap(), c(1.0, 0.0)),
            Err(Error::A1Failure { .. })
        ));
        assert!(matches!(
            PeriodicZipper::uniform(Mat2::swap(), Mat2::identity(), c(1.0, 0.0)),
            Err(Error::A2Failure { .. })
        ));
    }
}
