//! Complex 2×2 algebra, the φ♯/φ♭ rewiring maps, U(1,1) diagnostics and a
//! small dense square matrix type for shell blocks and finite truncations.
//!
//! A relation `(Ψ₋; Ψ₊) = M (Φ₋; Φ₊)` with `M = (α β; γ δ)` and `β ≠ 0` can be
//! solved for the pair on the `+` side:
//!
//! ```text
//! (Φ₊; Ψ₊) = φ♯(M) (Ψ₋; Φ₋),   φ♯(M) = (β⁻¹, −β⁻¹α; δβ⁻¹, γ−δβ⁻¹α)
//! (Ψ₊; Φ₊) = φ♭(M) (Φ₋; Ψ₋),   φ♭(M) = (γ−δβ⁻¹α, δβ⁻¹; −β⁻¹α, β⁻¹)
//! ```
//!
//! Both maps send U(2) into U(1,1) and satisfy `φ♯(M) = φ♭(M⁻¹)`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

pub type C64 = Complex64;

/// Default threshold on |β| below which the φ maps refuse to invert.
pub const TOL_BETA: f64 = 1e-9;
/// Default tolerance for U(1,1) and unitarity defects.
pub const TOL_DEFECT: f64 = 1e-8;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

/// A complex 2×2 matrix `(a11 a12; a21 a22)`.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Mat2 {
    pub a11: C64,
    pub a12: C64,
    pub a21: C64,
    pub a22: C64,
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a11, self.a12, self.a21, self.a22)
    }
}

impl Mat2 {
    pub const fn new(a11: C64, a12: C64, a21: C64, a22: C64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2::new(c(a11, 0.0), c(a12, 0.0), c(a21, 0.0), c(a22, 0.0))
    }

    pub fn identity() -> Self {
        Mat2::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn zero() -> Self {
        Mat2::default()
    }

    /// The channel swap `(0 1; 1 0)`.
    pub fn swap() -> Self {
        Mat2::real(0.0, 1.0, 1.0, 0.0)
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Mat2::new(d1, C64::default(), C64::default(), d2)
    }

    /// The Hadamard coin `(1 1; 1 −1)/√2`.
    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Mat2::real(s, s, s, -s)
    }

    /// The real orthogonal block `(cos θ, sin θ; sin θ, −cos θ)`.
    pub fn reflection(theta: f64) -> Self {
        let (s, co) = theta.sin_cos();
        Mat2::real(co, s, s, -co)
    }

    pub fn det(&self) -> C64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> C64 {
        self.a11 + self.a22
    }

    pub fn adjoint(&self) -> Self {
        Mat2::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.norm() <= f64::MIN_POSITIVE || !d.is_finite() {
            return Err(Error::SingularBlock { value: d.norm(), tol: 0.0 });
        }
        let di = d.inv();
        Ok(Mat2::new(self.a22 * di, -self.a12 * di, -self.a21 * di, self.a11 * di))
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn frobenius(&self) -> f64 {
        (self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr())
            .sqrt()
    }

    /// Largest and smallest singular values, in that order.
    pub fn singular_values(&self) -> (f64, f64) {
        let m = [self.a11, self.a12, self.a21, self.a22].iter().map(|x| x.norm()).fold(0.0, f64::max);
        if m == 0.0 || !m.is_finite() {
            return (m, m);
        }
        // scaled to avoid overflow in the squared quantities
        let s = self.scale(c(1.0 / m, 0.0));
        // rotate so det is real and nonnegative; then
        // (σ₁ ± σ₂)² = |a ± d̄|² + |b ∓ c̄|² without cancellation
        let det = s.det();
        let r = if det.norm() > 0.0 { (det / det.norm()).sqrt().conj() } else { c(1.0, 0.0) };
        let s = s.scale(r);
        let plus = ((s.a11 + s.a22.conj()).norm_sqr() + (s.a12 - s.a21.conj()).norm_sqr()).sqrt();
        let minus = ((s.a11 - s.a22.conj()).norm_sqr() + (s.a12 + s.a21.conj()).norm_sqr()).sqrt();
        let smax = 0.5 * (plus + minus);
        let smin = 0.5 * (plus - minus).max(0.0);
        (smax * m, smin * m)
    }

    /// Operator 2-norm.
    pub fn norm(&self) -> f64 {
        self.singular_values().0
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        [
            (self.a11 - other.a11).norm(),
            (self.a12 - other.a12).norm(),
            (self.a21 - other.a21).norm(),
            (self.a22 - other.a22).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `‖M*M − I‖_F`.
    pub fn unitary_defect(&self) -> f64 {
        (self.adjoint() * *self - Mat2::identity()).frobenius()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * r.a11 + self.a12 * r.a21,
            self.a11 * r.a12 + self.a12 * r.a22,
            self.a21 * r.a11 + self.a22 * r.a21,
            self.a21 * r.a12 + self.a22 * r.a22,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a11 + r.a11, self.a12 + r.a12, self.a21 + r.a21, self.a22 + r.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a11 - r.a11, self.a12 - r.a12, self.a21 - r.a21, self.a22 - r.a22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(c(-1.0, 0.0))
    }
}

fn check_beta(m: &Mat2, tol_beta: f64) -> Result<C64> {
    let beta = m.a12;
    if beta.norm() <= tol_beta || !beta.is_finite() {
        return Err(Error::SingularBeta { beta: beta.norm(), tol: tol_beta });
    }
    Ok(beta.inv())
}

fn finite_or_err(m: Mat2) -> Result<Mat2> {
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::SingularBeta { beta: 0.0, tol: 0.0 })
    }
}

/// `φ♯(M) = (β⁻¹, −β⁻¹α; δβ⁻¹, γ−δβ⁻¹α)`.
pub fn phi_sharp(m: &Mat2, tol_beta: f64) -> Result<Mat2> {
    let bi = check_beta(m, tol_beta)?;
    let (a, g, d) = (m.a11, m.a21, m.a22);
    finite_or_err(Mat2::new(bi, -bi * a, d * bi, g - d * bi * a))
}

/// `φ♭(M) = (γ−δβ⁻¹α, δβ⁻¹; −β⁻¹α, β⁻¹)`.
pub fn phi_flat(m: &Mat2, tol_beta: f64) -> Result<Mat2> {
    let bi = check_beta(m, tol_beta)?;
    let (a, g, d) = (m.a11, m.a21, m.a22);
    finite_or_err(Mat2::new(g - d * bi * a, d * bi, -bi * a, bi))
}

/// Inverse of φ♯: `(A B; C D) ↦ (−BA⁻¹, A⁻¹; D−CA⁻¹B, CA⁻¹)`.
pub fn phi_sharp_inv(t: &Mat2, tol: f64) -> Result<Mat2> {
    let a = t.a11;
    if a.norm() <= tol || !a.is_finite() {
        return Err(Error::SingularBlock { value: a.norm(), tol });
    }
    let ai = a.inv();
    let (b, cc, d) = (t.a12, t.a21, t.a22);
    finite_or_err(Mat2::new(-b * ai, ai, d - cc * ai * b, cc * ai))
}

/// Inverse of φ♭: `(A B; C D) ↦ (−CD⁻¹, D⁻¹; A−BD⁻¹C, BD⁻¹)`.
pub fn phi_flat_inv(t: &Mat2, tol: f64) -> Result<Mat2> {
    let d = t.a22;
    if d.norm() <= tol || !d.is_finite() {
        return Err(Error::SingularBlock { value: d.norm(), tol });
    }
    let di = d.inv();
    let (a, b, cc) = (t.a11, t.a12, t.a21);
    finite_or_err(Mat2::new(-cc * di, di, a - b * di * cc, b * di))
}

/// `‖T*GT − G‖_F` with `G = diag(1, −1)`.
pub fn u11_defect(t: &Mat2) -> f64 {
    let g = Mat2::real(1.0, 0.0, 0.0, -1.0);
    (t.adjoint() * g * *t - g).frobenius()
}

/// Eigenstructure of a U(1,1) matrix: eigenvalues `e^{iχ}λ` and `e^{iχ}λ⁻¹`
/// with `λ + λ⁻¹` real and `|λ| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct U11Eigensystem {
    /// Angle in `[0, π)` with `e^{2iχ} = det T`.
    pub chi: f64,
    /// The eigenvalue factor with `|λ| ≤ 1` (for unimodular λ, `Im λ ≥ 0`).
    pub lambda: C64,
    /// Unit eigenvector for `e^{iχ}λ`.
    pub eigvec_minus: [C64; 2],
    /// Unit eigenvector for `e^{iχ}λ⁻¹`.
    pub eigvec_plus: [C64; 2],
    /// Set when `|λ + λ⁻¹| = 2` within tolerance; eigenvectors may then coincide.
    pub degenerate: bool,
}

impl U11Eigensystem {
    pub fn eigenvalue_minus(&self) -> C64 {
        cis(self.chi) * self.lambda
    }

    pub fn eigenvalue_plus(&self) -> C64 {
        cis(self.chi) / self.lambda
    }
}

/// Normalise to unit length with the first non-negligible component real positive.
pub fn normalize_phase(v: [C64; 2]) -> [C64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    if n == 0.0 {
        return v;
    }
    let lead = if v[0].norm() > 1e-14 * n { v[0] } else { v[1] };
    let ph = lead.conj() / (lead.norm() * n);
    [v[0] * ph, v[1] * ph]
}

/// Eigenvector of `t` for eigenvalue `mu`, chosen from the better-conditioned row.
pub fn eigvec_for(t: &Mat2, mu: C64) -> [C64; 2] {
    let v1 = [t.a12, mu - t.a11];
    let v2 = [mu - t.a22, t.a21];
    let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
    let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
    let scale = t.frobenius().max(mu.norm()).max(1.0);
    if n1.max(n2) <= (1e-14 * scale).powi(2) {
        // t is (numerically) a multiple of the identity
        return [c(1.0, 0.0), c(0.0, 0.0)];
    }
    normalize_phase(if n1 >= n2 { v1 } else { v2 })
}

/// Eigenstructure of `t`, which must satisfy `|det t| = 1` and
/// `(Tr t)²/det t ∈ ℝ` up to `tol` (relative to `‖t‖²`), as every U(1,1) matrix does.
pub fn u11_eigensystem(t: &Mat2, tol: f64) -> Result<U11Eigensystem> {
    // The eigenvalue formula needs exactly the two consequences of U(1,1)
    // membership checked here: |det T| = 1 and (Tr T)²/det T real.
    let scale = t.frobenius().powi(2).max(1.0);
    let det = t.det();
    let disc_imag = (t.trace() * t.trace() / det).im;
    if !((det.norm() - 1.0).abs() <= tol * scale && disc_imag.abs() <= tol * scale) {
        return Err(Error::NotU11 { defect: u11_defect(t) });
    }
    let mut chi = 0.5 * det.arg();
    if chi < 0.0 {
        chi += std::f64::consts::PI;
    }
    let tau = (t.trace() * cis(-chi)).re;
    let tr_tol = 1e-9 * scale.sqrt();
    let degenerate = (tau.abs() - 2.0).abs() <= tr_tol;
    let lambda = if tau.abs() >= 2.0 {
        let r = (tau * tau - 4.0).sqrt();
        // smaller root, computed without cancellation
        c(2.0 / (tau + tau.signum() * r), 0.0)
    } else {
        c(0.5 * tau, 0.5 * (4.0 - tau * tau).sqrt())
    };
    let e = cis(chi);
    let eigvec_minus = eigvec_for(t, e * lambda);
    let eigvec_plus = eigvec_for(t, e / lambda);
    Ok(U11Eigensystem { chi, lambda, eigvec_minus, eigvec_plus, degenerate })
}

/// Haar-distributed unitary of size `n` (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> MatN {
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    c(re, im)
                })
                .collect()
        })
        .collect();
    // modified Gram–Schmidt, twice for stability
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let qk = &head[k];
                let v = &mut tail[0];
                let proj: C64 = qk.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(qk.iter()) {
                    *vi -= proj * qi;
                }
            }
        }
        let nrm = cols[j].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[j].iter_mut() {
            *x /= nrm;
        }
    }
    MatN::from_fn(n, |i, j| cols[j][i])
}

/// Haar-distributed element of U(2).
pub fn haar_u2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let m = haar_unitary(2, rng);
    Mat2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct MatN {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for MatN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatN {}x{}", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for MatN {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for MatN {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl MatN {
    pub fn zeros(n: usize) -> Self {
        MatN { n, data: vec![C64::default(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = MatN::zeros(n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        MatN { n, data }
    }

    /// Build from rows; fails unless the rows form a square array.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!("matrix with {n} rows is not square")));
        }
        Ok(MatN { n, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_mat2(m: &Mat2) -> Self {
        MatN { n: 2, data: vec![m.a11, m.a12, m.a21, m.a22] }
    }

    /// Permutation matrix sending basis vector `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = MatN::zeros(n);
        for (j, &i) in perm.iter().enumerate() {
            m[(i, j)] = c(1.0, 0.0);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        MatN::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        MatN { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn matmul(&self, r: &MatN) -> MatN {
        assert_eq!(self.n, r.n, "matmul size mismatch");
        let n = self.n;
        let mut out = MatN::zeros(n);
        for i in 0..n {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::default() {
                    continue;
                }
                let rrow = &r.data[k * n..(k + 1) * n];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn add(&self, r: &MatN) -> MatN {
        MatN { n: self.n, data: self.data.iter().zip(&r.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, r: &MatN) -> MatN {
        MatN { n: self.n, data: self.data.iter().zip(&r.data).map(|(a, b)| a - b).collect() }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n).map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, r: &MatN) -> f64 {
        self.data.iter().zip(&r.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Solve `A X = B` for the given right-hand columns, refusing when the
    /// condition estimate exceeds `cond_limit`.
    pub fn solve(&self, rhs: &[Vec<C64>], cond_limit: f64) -> Result<Vec<Vec<C64>>> {
        let lu = Lu::factor(self)?;
        let anorm = self.norm1();
        let mut out = Vec::with_capacity(rhs.len());
        let mut cond = lu.pivot_ratio();
        for b in rhs {
            let x = lu.solve(b);
            let bn: f64 = b.iter().map(|v| v.norm()).sum();
            let xn: f64 = x.iter().map(|v| v.norm()).sum();
            if bn > 0.0 {
                cond = cond.max(anorm * xn / bn);
            }
            if !x.iter().all(|v| v.is_finite()) {
                return Err(Error::SingularResolvent { cond: f64::INFINITY });
            }
            out.push(x);
        }
        if cond > cond_limit {
            return Err(Error::SingularResolvent { cond });
        }
        Ok(out)
    }

    /// Inverse with the same conditioning guard as [`MatN::solve`].
    pub fn inverse(&self, cond_limit: f64) -> Result<MatN> {
        let lu = Lu::factor(self)?;
        let n = self.n;
        let mut inv = MatN::zeros(n);
        for j in 0..n {
            let mut e = vec![C64::default(); n];
            e[j] = c(1.0, 0.0);
            let x = lu.solve(&e);
            for i in 0..n {
                inv[(i, j)] = x[i];
            }
        }
        let cond = self.norm1() * inv.norm1();
        if !inv.is_finite() || cond > cond_limit {
            return Err(Error::SingularResolvent { cond });
        }
        Ok(inv)
    }
}

/// `‖M*M − I‖_F`.
pub fn unitary_defect(m: &MatN) -> f64 {
    m.adjoint().matmul(m).sub(&MatN::identity(m.size())).frobenius()
}

/// LU factorisation with partial pivoting.
struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &MatN) -> Result<Lu> {
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(Error::SingularResolvent { cond: f64::INFINITY });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / piv;
                lu[i * n + k] = f;
                if f == C64::default() {
                    continue;
                }
                for j in k + 1..n {
                    let t = lu[k * n + j];
                    lu[i * n + j] -= f * t;
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    fn pivot_ratio(&self) -> f64 {
        let d: Vec<f64> = (0..self.n).map(|k| self.lu[k * self.n + k].norm()).collect();
        let mx = d.iter().cloned().fold(0.0, f64::max);
        let mn = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if self.n == 0 {
            1.0
        } else {
            mx / mn
        }
    }

    fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}
