//! Dense finite restrictions `𝒰_N^{(u,v)} = 𝒲_N^{(u,v)} 𝒱_N` and their
//! Green functions, boundary resolvents and spectral measures.
//!
//! Everything here is brute force on purpose. It is the reference the
//! transfer-matrix code is checked against.

use crate::error::{Error, Result};
use crate::mat2core::{c, phi_sharp, Mat2, MatN, C64};
use crate::model::OneChannelModel;
use crate::transfer::transfer_product;
use faer::{Mat, Side};

/// Largest dense assembly we accept.
pub const MAX_DIM: usize = 4096;
/// Conditioning limit for resolvent solves.
pub const COND_LIMIT: f64 = 1e12;

/// A dense truncation together with its index bookkeeping.
#[derive(Debug, Clone)]
pub struct FiniteOperator {
    pub level: usize,
    pub u: C64,
    pub v: C64,
    pub tilde: bool,
    /// `offsets[n]` is the first row of shell `n`.
    pub offsets: Vec<usize>,
    /// Row of `e_{(0,−)}`.
    pub row_first: usize,
    /// Row of `e_{(N,+)}`.
    pub row_last: usize,
    pub matrix: MatN,
}

impl FiniteOperator {
    pub fn dim(&self) -> usize {
        self.matrix.size()
    }
}

/// `𝒲_N^{(u,v)}` and `𝒱_N` as dense matrices.
pub fn assemble_parts(model: &OneChannelModel, level: usize, u: C64, v: C64) -> Result<(MatN, MatN)> {
    model.shell(level)?;
    let dim = model.dim(level);
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge { dim, limit: MAX_DIM });
    }
    let offsets = model.offsets();
    let mut vm = MatN::zeros(dim);
    for n in 0..=level {
        let s = model.shell(n)?;
        let o = offsets[n];
        for i in 0..s.size {
            for j in 0..s.size {
                vm[(o + i, o + j)] = s.v[(i, j)];
            }
        }
    }
    let mut wm = MatN::identity(dim);
    let first = offsets[0] + model.shell(0)?.index_minus;
    let last = offsets[level] + model.shell(level)?.index_plus;
    wm[(first, first)] = u;
    wm[(last, last)] = v;
    for n in 1..=level {
        let w = model.coupling(n)?;
        let i = offsets[n - 1] + model.shell(n - 1)?.index_plus;
        let j = offsets[n] + model.shell(n)?.index_minus;
        wm[(i, i)] = w.a11;
        wm[(i, j)] = w.a12;
        wm[(j, i)] = w.a21;
        wm[(j, j)] = w.a22;
    }
    Ok((wm, vm))
}

/// Assemble `𝒲𝒱` (or `𝒱𝒲` when `tilde`) restricted to shells `0..=N`.
pub fn assemble(model: &OneChannelModel, level: usize, u: C64, v: C64, tilde: bool) -> Result<FiniteOperator> {
    let (wm, vm) = assemble_parts(model, level, u, v)?;
    let matrix = if tilde { vm.matmul(&wm) } else { wm.matmul(&vm) };
    let offsets: Vec<usize> = model.offsets()[..=level].to_vec();
    Ok(FiniteOperator {
        level,
        u,
        v,
        tilde,
        row_first: offsets[0] + model.shell(0)?.index_minus,
        row_last: offsets[level] + model.shell(level)?.index_plus,
        offsets,
        matrix,
    })
}

fn resolvent_operator(op: &FiniteOperator, z: C64) -> Result<MatN> {
    if z == C64::default() {
        return Err(Error::SingularResolvent { cond: f64::INFINITY });
    }
    let mut a = op.matrix.scale(z.inv());
    for i in 0..op.dim() {
        a[(i, i)] -= c(1.0, 0.0);
    }
    Ok(a)
}

fn unit(dim: usize, i: usize) -> Vec<C64> {
    let mut e = vec![C64::default(); dim];
    e[i] = c(1.0, 0.0);
    e
}

/// `g(z) = e_{(0,−)}*(z⁻¹𝒰 − I)⁻¹ e_{(0,−)}` by a dense solve.
pub fn green(op: &FiniteOperator, z: C64) -> Result<C64> {
    let a = resolvent_operator(op, z)?;
    let x = a.solve(&[unit(op.dim(), op.row_first)], COND_LIMIT)?;
    Ok(x[0][op.row_first])
}

/// `Q*(z⁻¹𝒰_N − I)⁻¹Q` with `Q = (e_{(0,−)}, e_{(N,+)})`.
pub fn boundary_resolvent_of(op: &FiniteOperator, z: C64) -> Result<Mat2> {
    let a = resolvent_operator(op, z)?;
    let (f, l) = (op.row_first, op.row_last);
    let x = a.solve(&[unit(op.dim(), f), unit(op.dim(), l)], COND_LIMIT)?;
    Ok(Mat2::new(x[0][f], x[1][f], x[0][l], x[1][l]))
}

/// [`boundary_resolvent_of`] on a fresh assembly.
pub fn boundary_resolvent(model: &OneChannelModel, level: usize, u: C64, v: C64, z: C64, tilde: bool) -> Result<Mat2> {
    boundary_resolvent_of(&assemble(model, level, u, v, tilde)?, z)
}

/// The transfer product reconstructed from the `(1,1)` boundary resolvent:
/// `T_{z,[0,N]} = (1 1; 0 1) φ♯(R^{(1,1)}) (1 0; −1 1)`.
pub fn transfer_from_resolvent(model: &OneChannelModel, level: usize, z: C64) -> Result<Mat2> {
    let one = c(1.0, 0.0);
    let r = boundary_resolvent(model, level, one, one, z, false)?;
    let s = phi_sharp(&r, 1e-300).map_err(|_| Error::ExceptionalPoint { level, z })?;
    Ok(Mat2::real(1.0, 1.0, 0.0, 1.0) * s * Mat2::real(1.0, 0.0, -1.0, 1.0))
}

/// Closed form of the `v`-averaged Green function, `−B/(Au + B)`
/// with `(A B)` the top row of `T_{z,[0,N]}`.
pub fn averaged_green(model: &OneChannelModel, level: usize, u: C64, z: C64) -> Result<C64> {
    let t = transfer_product(model, z, level, false)?;
    if t.exceptional {
        return Err(Error::ExceptionalPoint { level: t.exceptional_level.unwrap_or(level), z });
    }
    let (a, b) = (t.matrix.a11, t.matrix.a12);
    Ok(-b / (a * u + b))
}

/// The `v`-average of `g^{(u,v)}(z)` over the unit circle by the trapezoid
/// rule with `points` nodes; every node is a dense solve.
pub fn averaged_green_quadrature(model: &OneChannelModel, level: usize, u: C64, z: C64, points: usize) -> Result<C64> {
    let mut acc = C64::default();
    for k in 0..points {
        let v = crate::mat2core::cis(std::f64::consts::TAU * k as f64 / points as f64);
        acc += green(&assemble(model, level, u, v, false)?, z)?;
    }
    Ok(acc / points as f64)
}

/// Exact `v`-average of `g^{(u,v)}` from one dense solve.
///
/// `𝒰^{(u,v)}` differs from `𝒰^{(u,1)}` by the phase `v` on `e_{(N,+)}`, so
/// `g^{(u,v)}` is a Möbius function of `v⁻¹`; its circle average is its value
/// at `v⁻¹ = 0`: `G₀₀ − G₀ₗG_{l0}/(1 + G_{ll})` with `G = (z⁻¹𝒰^{(u,1)} − I)⁻¹`.
pub fn averaged_green_dense(model: &OneChannelModel, level: usize, u: C64, z: C64) -> Result<C64> {
    let op = assemble(model, level, u, c(1.0, 0.0), false)?;
    let g = boundary_resolvent_of(&op, z)?;
    Ok(rank_one_average(&g))
}

fn rank_one_average(g: &Mat2) -> C64 {
    g.a11 - g.a12 * g.a21 / (c(1.0, 0.0) + g.a22)
}

/// Eigen-decomposition data of a finite operator restricted to the two
/// boundary rows.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenangles in `[0, 2π)`.
    pub angles: Vec<f64>,
    /// `ψ_j(e_{(0,−)})`.
    pub first: Vec<C64>,
    /// `ψ_j(e_{(N,+)})`.
    pub last: Vec<C64>,
}

impl Spectrum {
    /// Spectral weights `|⟨e_{(0,−)}, ψ_j⟩|²`.
    pub fn weights(&self) -> Vec<f64> {
        self.first.iter().map(|x| x.norm_sqr()).collect()
    }

    /// `Q*(z⁻¹𝒰 − I)⁻¹Q` from the eigen-expansion.
    pub fn boundary_resolvent(&self, z: C64) -> Mat2 {
        let zi = z.inv();
        let mut g = Mat2::zero();
        for ((&th, &a), &b) in self.angles.iter().zip(&self.first).zip(&self.last) {
            let d = (zi * crate::mat2core::cis(th) - c(1.0, 0.0)).inv();
            g.a11 += a * a.conj() * d;
            g.a12 += a * b.conj() * d;
            g.a21 += b * a.conj() * d;
            g.a22 += b * b.conj() * d;
        }
        g
    }

    /// `g(z)` for the decomposed operator.
    pub fn green(&self, z: C64) -> C64 {
        let zi = z.inv();
        self.angles
            .iter()
            .zip(&self.first)
            .map(|(&th, a)| a.norm_sqr() / (zi * crate::mat2core::cis(th) - c(1.0, 0.0)))
            .sum()
    }

    /// Poisson smoothing `1 + 2 Re g(z)` of the spectral measure.
    pub fn poisson(&self, z: C64) -> f64 {
        1.0 + 2.0 * self.green(z).re
    }

    /// Poisson smoothing of the `v`-averaged measure. Valid when the
    /// decomposed operator is the plain assembly with `v = 1`.
    pub fn averaged_poisson(&self, z: C64) -> f64 {
        1.0 + 2.0 * rank_one_average(&self.boundary_resolvent(z)).re
    }
}

/// Eigenvalues closer than this in `cos θ` are resolved jointly.
const CLUSTER_GAP: f64 = 1e-6;

fn to_faer(m: &MatN) -> Mat<C64> {
    Mat::from_fn(m.size(), m.size(), |i, j| m[(i, j)])
}

/// Full eigen-decomposition of a unitary matrix: eigenangles and the
/// orthonormal eigenvectors as columns.
///
/// `(U + U*)/2` is diagonalised first; groups whose `cos θ` values are close
/// (including the `±θ` pairs it cannot tell apart) are split by
/// diagonalising `(C − C*)/2i` with `C` the compression of `U` to the group.
pub fn unitary_eigen(u: &MatN) -> Result<(Vec<f64>, Mat<C64>)> {
    let n = u.size();
    let fu = to_faer(u);
    let h = Mat::from_fn(n, n, |i, j| (fu[(i, j)] + fu[(j, i)].conj()) * 0.5);
    let evd = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::EigensolverFailure(format!("{e:?}")))?;
    let q = evd.U();
    let s = evd.S().column_vector();
    let mut vecs = Mat::<C64>::zeros(n, n);
    let mut angles = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && s[end].re - s[end - 1].re < CLUSTER_GAP {
            end += 1;
        }
        let m = end - start;
        let block = q.subcols(start, m);
        if m == 1 {
            for i in 0..n {
                vecs[(i, start)] = block[(i, 0)];
            }
        } else {
            let cm = block.adjoint() * (&fu * block);
            let k = Mat::from_fn(m, m, |i, j| (cm[(i, j)] - cm[(j, i)].conj()) * c(0.0, -0.5));
            let kev = k.self_adjoint_eigen(Side::Lower).map_err(|e| Error::EigensolverFailure(format!("{e:?}")))?;
            let rot = block * kev.U();
            for j in 0..m {
                for i in 0..n {
                    vecs[(i, start + j)] = rot[(i, j)];
                }
            }
        }
        start = end;
    }
    // Rayleigh quotients give the angles
    let uv = &fu * &vecs;
    for (j, angle) in angles.iter_mut().enumerate() {
        let rq: C64 = (0..n).map(|i| vecs[(i, j)].conj() * uv[(i, j)]).sum();
        *angle = crate::numeric::wrap_angle(rq.arg());
    }
    Ok((angles, vecs))
}

/// Eigen-decomposition of a finite operator, keeping the boundary rows.
pub fn spectrum(op: &FiniteOperator) -> Result<Spectrum> {
    let (angles, vecs) = unitary_eigen(&op.matrix)?;
    let n = op.dim();
    let first: Vec<C64> = (0..n).map(|j| vecs[(op.row_first, j)]).collect();
    let last: Vec<C64> = (0..n).map(|j| vecs[(op.row_last, j)]).collect();
    let total: f64 = first.iter().map(|x| x.norm_sqr()).sum();
    if !((total - 1.0).abs() <= 1e-10) {
        return Err(Error::EigensolverFailure(format!("spectral weights sum to {total}")));
    }
    Ok(Spectrum { angles, first, last })
}

/// The spectral measure of `e_{(0,−)}`: `(angle, weight)` pairs sorted by angle.
pub fn spectral_measure(op: &FiniteOperator) -> Result<Vec<(f64, f64)>> {
    let sp = spectrum(op)?;
    let mut out: Vec<(f64, f64)> = sp.angles.iter().copied().zip(sp.weights()).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// The generalized eigenfunction `Ψ` on `𝔾_N` rebuilt from transfer matrices:
/// channel values come from the transfer recursion, and inside shell `n`
/// `Ψ_n = (z⁻¹V_n − P_n)⁻¹ Q_n (Φ_{(n,−)}; Φ_{(n,+)})`.
pub fn eigenfunction_from_transfer(model: &OneChannelModel, level: usize, z: C64, u: C64) -> Result<Vec<C64>> {
    model.shell(level)?;
    let offsets = model.offsets();
    let mut psi = vec![C64::default(); model.dim(level)];
    // (Ψ_{(n,−)}; Φ_{(n,−)}) and (Φ_{(n,+)}; Ψ_{(n,+)})
    let mut minus = [u, c(1.0, 0.0)];
    let mut plus = [u, c(1.0, 0.0)];
    for n in 0..=level {
        if n >= 1 {
            minus = crate::transfer::t_flat(model, n)?.apply(plus);
        }
        plus = crate::transfer::t_sharp(model, n, z)?.apply(minus);
        let shell = model.shell(n)?;
        let (phi_m, phi_p) = (minus[1], plus[0]);
        let mut a = shell.v.scale(z.inv());
        for i in 0..shell.size {
            if i != shell.index_minus && i != shell.index_plus {
                a[(i, i)] -= c(1.0, 0.0);
            }
        }
        let mut rhs = vec![C64::default(); shell.size];
        rhs[shell.index_minus] = phi_m;
        rhs[shell.index_plus] = phi_p;
        let x = a.solve(&[rhs], COND_LIMIT)?;
        for i in 0..shell.size {
            psi[offsets[n] + i] = x[0][i];
        }
    }
    Ok(psi)
}
