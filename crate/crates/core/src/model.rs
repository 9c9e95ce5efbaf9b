//! One-channel unitary operators `𝒰 = 𝒲𝒱` and builders for the standard families.
//!
//! A model is a finite run of shells `S_0, …, S_N`. Each shell carries a
//! unitary block `V_n` and two distinguished basis vectors, the channel modes
//! `e_{(n,−)}` and `e_{(n,+)}`. Consecutive shells talk only through the 2×2
//! unitary `W_n`, which acts on the pair `(e_{(n−1,+)}, e_{(n,−)})`. The
//! boundary phase `u` sits on `e_{(0,−)}`.

use crate::error::{Error, Result};
use crate::mat2core::{c, unitary_defect, Mat2, MatN, C64};

/// Entries below this are treated as structural zeros.
pub const CHANNEL_ZERO: f64 = 1e-12;
/// Tolerance on the unitarity of every block handed to a builder.
pub const UNITARY_TOL: f64 = 1e-10;

/// A shell `S_n` with its block `V_n` and channel modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub size: usize,
    pub index_minus: usize,
    pub index_plus: usize,
    pub v: MatN,
}

impl Shell {
    pub fn new(v: MatN, index_minus: usize, index_plus: usize) -> Result<Shell> {
        let size = v.size();
        if size < 2 {
            return Err(Error::ShapeMismatch(format!("shell of size {size}; need at least 2")));
        }
        if index_minus >= size || index_plus >= size || index_minus == index_plus {
            return Err(Error::ShapeMismatch(format!(
                "channel indices ({index_minus}, {index_plus}) invalid for shell of size {size}"
            )));
        }
        let defect = unitary_defect(&v);
        if !(defect < UNITARY_TOL) {
            return Err(Error::NonUnitary { what: "shell block".into(), defect });
        }
        Ok(Shell { size, index_minus, index_plus, v })
    }

    /// A two-site shell with `e₋ = δ₀`, `e₊ = δ₁`.
    pub fn zipper(v: &Mat2) -> Result<Shell> {
        Shell::new(MatN::from_mat2(v), 0, 1)
    }

    pub fn is_zipper(&self) -> bool {
        self.size == 2 && self.index_minus == 0 && self.index_plus == 1
    }

    /// The 2×2 block when the shell is a zipper shell.
    pub fn as_mat2(&self) -> Option<Mat2> {
        self.is_zipper().then(|| Mat2::new(self.v[(0, 0)], self.v[(0, 1)], self.v[(1, 0)], self.v[(1, 1)]))
    }
}

/// The entries of a scattering zipper: every shell has two sites.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipperSpec {
    /// `V_0, …, V_N`.
    pub v: Vec<Mat2>,
    /// `W_1, …, W_N`.
    pub w: Vec<Mat2>,
}

/// A truncation `S_0..S_N` of a one-channel operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OneChannelModel {
    shells: Vec<Shell>,
    /// `couplings[n−1] = W_n`.
    couplings: Vec<Mat2>,
    u: C64,
    a1: Vec<bool>,
    a2: Vec<bool>,
}

fn check_u(u: C64) -> Result<()> {
    if !((u.norm() - 1.0).abs() < UNITARY_TOL) {
        return Err(Error::Config(format!("boundary phase must have modulus 1, got {}", u.norm())));
    }
    Ok(())
}

fn check_unitary2(m: &Mat2, what: &str) -> Result<()> {
    let defect = m.unitary_defect();
    if !(defect < UNITARY_TOL) {
        return Err(Error::NonUnitary { what: what.into(), defect });
    }
    Ok(())
}

impl OneChannelModel {
    /// Assemble a model from shells and couplings `W_1..W_N`.
    pub fn new(shells: Vec<Shell>, couplings: Vec<Mat2>, u: C64) -> Result<Self> {
        check_u(u)?;
        if !shells.is_empty() && couplings.len() + 1 != shells.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} shells need {} couplings, got {}",
                shells.len(),
                shells.len() - 1,
                couplings.len()
            )));
        }
        if shells.is_empty() && !couplings.is_empty() {
            return Err(Error::ShapeMismatch("couplings without shells".into()));
        }
        for w in &couplings {
            check_unitary2(w, "coupling W_n")?;
        }
        let a1 = shells.iter().map(|s| a1_holds(s, s.size)).collect();
        let a2 = std::iter::once(true)
            .chain(couplings.iter().map(|w| w.a12.norm() > CHANNEL_ZERO))
            .take(shells.len())
            .collect();
        Ok(OneChannelModel { shells, couplings, u, a1, a2 })
    }

    pub fn shells(&self) -> &[Shell] {
        &self.shells
    }

    pub fn shell(&self, n: usize) -> Result<&Shell> {
        self.shells.get(n).ok_or(Error::IndexOutOfRange { index: n, len: self.shells.len() })
    }

    /// `W_n` for `n ≥ 1`.
    pub fn coupling(&self, n: usize) -> Result<&Mat2> {
        if n == 0 {
            return Err(Error::IndexOutOfRange { index: 0, len: self.shells.len() });
        }
        self.couplings.get(n - 1).ok_or(Error::IndexOutOfRange { index: n, len: self.shells.len() })
    }

    pub fn couplings(&self) -> &[Mat2] {
        &self.couplings
    }

    pub fn u(&self) -> C64 {
        self.u
    }

    /// The same operator with another boundary phase.
    pub fn with_u(&self, u: C64) -> Result<Self> {
        check_u(u)?;
        Ok(OneChannelModel { u, ..self.clone() })
    }

    /// Number of shells `N+1`.
    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }

    /// The top level `N`, if any shell exists.
    pub fn max_level(&self) -> Option<usize> {
        self.shells.len().checked_sub(1)
    }

    pub fn is_zipper(&self) -> bool {
        self.shells.iter().all(Shell::is_zipper)
    }

    /// Keep shells `0..=n`.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        self.shell(n)?;
        Ok(OneChannelModel {
            shells: self.shells[..=n].to_vec(),
            couplings: self.couplings[..n].to_vec(),
            u: self.u,
            a1: self.a1[..=n].to_vec(),
            a2: self.a2[..=n].to_vec(),
        })
    }

    /// `Σ_{n≤N} |S_n|`.
    pub fn dim(&self, level: usize) -> usize {
        self.shells[..=level].iter().map(|s| s.size).sum()
    }

    /// Row offset of each shell in the finite assembly.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.shells
            .iter()
            .map(|s| {
                let o = acc;
                acc += s.size;
                o
            })
            .collect()
    }

    /// First level where (A1) or (A2) fails, with the matching error.
    pub fn first_failure(&self, upto: usize) -> Option<Error> {
        (0..=upto.min(self.len().saturating_sub(1))).find_map(|n| {
            if !self.a1[n] {
                Some(Error::A1Failure { level: n })
            } else if !self.a2[n] {
                Some(Error::A2Failure { level: n })
            } else {
                None
            }
        })
    }

    /// The zipper blocks, when every shell has two sites.
    pub fn zipper_spec(&self) -> Option<ZipperSpec> {
        let v: Option<Vec<Mat2>> = self.shells.iter().map(Shell::as_mat2).collect();
        v.map(|v| ZipperSpec { v, w: self.couplings.clone() })
    }
}

fn a1_holds(shell: &Shell, k_max: usize) -> bool {
    let mut x = vec![C64::default(); shell.size];
    x[shell.index_minus] = c(1.0, 0.0);
    for _ in 0..k_max {
        x = shell.v.matvec(&x);
        if x[shell.index_plus].norm() > CHANNEL_ZERO {
            return true;
        }
    }
    false
}

/// (A1) at level `n`: some `e₊*V_n^k e₋` with `1 ≤ k ≤ |S_n|` is nonzero.
///
/// The bound `k ≤ |S_n|` is ours: the coefficients live in a Krylov space of
/// dimension at most `|S_n|`, so a longer search cannot find new directions.
pub fn validate_a1(model: &OneChannelModel, n: usize) -> Result<bool> {
    Ok(model.a1.get(n).copied().ok_or(Error::IndexOutOfRange { index: n, len: model.len() })?)
}

/// (A1) with a caller-chosen power bound.
pub fn validate_a1_with_bound(model: &OneChannelModel, n: usize, k_max: usize) -> Result<bool> {
    Ok(a1_holds(model.shell(n)?, k_max))
}

/// (A2) at level `n`: the upper-right entry `b_n` of `W_n` is nonzero.
/// Level 0 has no coupling and always passes.
pub fn validate_a2(model: &OneChannelModel, n: usize) -> Result<bool> {
    Ok(model.a2.get(n).copied().ok_or(Error::IndexOutOfRange { index: n, len: model.len() })?)
}

/// One-dimensional quantum walk: `V_n = swap·C_n`, `W_n = swap`.
pub fn build_qw1d(coins: &[Mat2], u: C64) -> Result<OneChannelModel> {
    let mut shells = Vec::with_capacity(coins.len());
    for coin in coins {
        check_unitary2(coin, "coin").map_err(|e| match e {
            Error::NonUnitary { defect, .. } => Error::NonUnitary { what: "coin".into(), defect },
            e => e,
        })?;
        shells.push(Shell::zipper(&(Mat2::swap() * *coin))?);
    }
    let couplings = vec![Mat2::swap(); coins.len().saturating_sub(1)];
    OneChannelModel::new(shells, couplings, u)
}

/// Recover the coins of a quantum-walk model (`C_n = swap·V_n`).
pub fn qw1d_coins(model: &OneChannelModel) -> Option<Vec<Mat2>> {
    let spec = model.zipper_spec()?;
    if spec.w.iter().any(|w| *w != Mat2::swap()) {
        return None;
    }
    Some(spec.v.iter().map(|v| Mat2::swap() * *v).collect())
}

/// Generalised walk (e.g. on a carbon chain): `V_n = S_n C_n` with `S_n` the
/// in-shell swap of the two channel orbitals, `W_n = swap`.
///
/// `channels[n] = (minus, plus)` are the orbital indices of `e_{(n,−)}` and `e_{(n,+)}`.
pub fn build_generalized_qw(
    shell_sizes: &[usize],
    channels: &[(usize, usize)],
    coins: &[MatN],
    u: C64,
) -> Result<OneChannelModel> {
    if shell_sizes.len() != channels.len() || shell_sizes.len() != coins.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} sizes, {} channel pairs, {} coins",
            shell_sizes.len(),
            channels.len(),
            coins.len()
        )));
    }
    let mut shells = Vec::with_capacity(coins.len());
    for ((&size, &(m, p)), coin) in shell_sizes.iter().zip(channels).zip(coins) {
        if coin.size() != size {
            return Err(Error::ShapeMismatch(format!("coin of size {} in shell of size {size}", coin.size())));
        }
        if size < 2 || m >= size || p >= size || m == p {
            return Err(Error::ShapeMismatch(format!("channel pair ({m}, {p}) in shell of size {size}")));
        }
        let defect = unitary_defect(coin);
        if !(defect < UNITARY_TOL) {
            return Err(Error::NonUnitary { what: "coin".into(), defect });
        }
        let mut perm: Vec<usize> = (0..size).collect();
        perm.swap(m, p);
        let v = MatN::permutation(&perm).matmul(coin);
        shells.push(Shell::new(v, m, p)?);
    }
    let couplings = vec![Mat2::swap(); coins.len().saturating_sub(1)];
    OneChannelModel::new(shells, couplings, u)
}

/// Scattering zipper from its 2×2 blocks.
pub fn build_zipper(spec: &ZipperSpec, u: C64) -> Result<OneChannelModel> {
    let mut shells = Vec::with_capacity(spec.v.len());
    for v in &spec.v {
        check_unitary2(v, "zipper block V_n")?;
        shells.push(Shell::zipper(v)?);
    }
    OneChannelModel::new(shells, spec.w.clone(), u)
}

/// A lattice site of `ℤ²`.
pub type Site = [i64; 2];

/// Sites of the square ring `S_n = {j : ‖j − (−½,−½)‖_∞ = n + ½}` in clockwise order.
pub fn ring_sites(n: usize) -> Vec<Site> {
    let n = n as i64;
    let mut s = Vec::with_capacity((8 * n + 4) as usize);
    for l in -n - 1..=n {
        s.push([l, n]);
    }
    for l in (-n - 1..n).rev() {
        s.push([n, l]);
    }
    for l in (-n - 1..n).rev() {
        s.push([l, -n - 1]);
    }
    for l in -n..n {
        s.push([-n - 1, l]);
    }
    s
}

/// How the inter-shell sites `a_n ∈ S_{n−1}`, `b_n ∈ S_n` are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum SiteChoice {
    /// `a_{2k}=(−2k,0)`, `b_{2k}=(−2k−1,0)`, `a_{2k+1}=(2k,0)`, `b_{2k+1}=(2k+1,0)`.
    Default,
    /// `b[n]` for `n = 0..=n_max` and `a[n]` for `n = 1..=n_max+1` (`a[0]` unused).
    Explicit { a: Vec<Site>, b: Vec<Site> },
}

fn default_a(n: usize) -> Site {
    let n = n as i64;
    if n % 2 == 0 {
        [-n, 0]
    } else {
        [n - 1, 0]
    }
}

fn default_b(n: usize) -> Site {
    let n = n as i64;
    if n % 2 == 0 {
        [-n - 1, 0]
    } else {
        [n, 0]
    }
}

/// Stroboscopic walk on `ℤ²`: ring shifts inside shells, alternating
/// clockwise (even `n`) and counter-clockwise (odd `n`), with `W_n` coupling
/// `δ_{a_n}` and `δ_{b_n}`.
pub fn build_stroboscopic(n_max: usize, w_seq: &[Mat2], sites: &SiteChoice, u: C64) -> Result<OneChannelModel> {
    if w_seq.len() != n_max {
        return Err(Error::ShapeMismatch(format!("{} couplings for n_max = {n_max}", w_seq.len())));
    }
    let (a, b): (Vec<Site>, Vec<Site>) = match sites {
        SiteChoice::Default => ((0..=n_max + 1).map(default_a).collect(), (0..=n_max).map(default_b).collect()),
        SiteChoice::Explicit { a, b } => {
            if a.len() < n_max + 2 || b.len() < n_max + 1 {
                return Err(Error::InvalidSiteChoice(format!(
                    "need a[1..={}] and b[0..={n_max}]",
                    n_max + 1
                )));
            }
            (a.clone(), b.clone())
        }
    };
    let mut shells = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let ring = ring_sites(n);
        let find = |s: Site, what: &str| {
            ring.iter().position(|&r| r == s).ok_or_else(|| {
                Error::InvalidSiteChoice(format!("{what} = {s:?} is not on ring {n}"))
            })
        };
        let minus = find(b[n], "b_n")?;
        let plus = find(a[n + 1], "a_{n+1}")?;
        if minus == plus {
            return Err(Error::InvalidSiteChoice(format!("a_{} equals b_{n}", n + 1)));
        }
        if n >= 1 {
            let d = (a[n][0] - b[n][0]).abs().max((a[n][1] - b[n][1]).abs());
            if d != 1 {
                return Err(Error::InvalidSiteChoice(format!("‖a_{n} − b_{n}‖_∞ = {d}, need 1")));
            }
        }
        let len = ring.len();
        let perm: Vec<usize> =
            (0..len).map(|i| if n % 2 == 0 { (i + 1) % len } else { (i + len - 1) % len }).collect();
        shells.push(Shell::new(MatN::permutation(&perm), minus, plus)?);
    }
    OneChannelModel::new(shells, w_seq.to_vec(), u)
}
