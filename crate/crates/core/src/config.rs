//! JSON model configurations.
//!
//! ```json
//! {"type": "zipper", "u": [1, 0], "period": 1, "n_shells": 201,
//!  "blocks": [{"V": [[0.866, 0.5], [0.5, -0.866]], "W": [[0, 1], [1, 0]]}]}
//! ```
//!
//! Complex numbers are `[re, im]` pairs or plain reals; matrices are lists of
//! rows. `blocks` depends on `type`:
//!
//! * `qw1d`: coins `C_n`; the walk is `V_n = swap·C_n`, `W_n = swap`.
//! * `zipper`: objects `{"V", "W"}`; the first entry's `W` is ignored when it
//!   describes level 0.
//! * `carbon`: objects `{"size", "channels": [minus, plus], "coin"}`.
//! * `stroboscopic`: couplings `W_1, W_2, …`; optional `"sites": {"a", "b"}`.
//!
//! With `period = p` the blocks repeat: shell `n ≥ 1` uses entry `(n−1) mod p`
//! (coins: `n mod p`). For zippers `p + 1` entries mean the first is `V_0`
//! alone; with `p` entries `V_0 = V_1`. Without a period the blocks list the
//! levels one by one. `n_shells` is the number of shells, levels `0..n_shells`.

use crate::error::{Error, Result};
use crate::mat2core::{c, Mat2, MatN, C64};
use crate::model::{build_generalized_qw, build_qw1d, build_stroboscopic, build_zipper, OneChannelModel, Site, SiteChoice, ZipperSpec};
use crate::periodic::PeriodicZipper;
use serde::Deserialize;
use serde_json::Value;

/// `[re, im]` or a plain real.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Complex {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Complex> for C64 {
    fn from(x: Complex) -> C64 {
        match x {
            Complex::Real(r) => c(r, 0.0),
            Complex::Pair([re, im]) => c(re, im),
        }
    }
}

type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Qw1d,
    Zipper,
    Carbon,
    Stroboscopic,
}

/// A parsed configuration; blocks are interpreted lazily by kind.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "type")]
    pub kind: ModelKind,
    #[serde(default = "one")]
    u: Complex,
    #[serde(default)]
    pub period: Option<usize>,
    pub blocks: Vec<Value>,
    #[serde(default)]
    pub n_shells: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    sites: Option<Sites>,
}

fn one() -> Complex {
    Complex::Real(1.0)
}

#[derive(Debug, Clone, Deserialize)]
struct Sites {
    a: Vec<Site>,
    b: Vec<Site>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZipperBlock {
    #[serde(rename = "V")]
    v: Matrix,
    #[serde(rename = "W", default)]
    w: Option<Matrix>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CarbonBlock {
    size: usize,
    channels: [usize; 2],
    coin: Matrix,
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn mat2(m: &Matrix) -> Result<Mat2> {
    if m.len() != 2 || m.iter().any(|r| r.len() != 2) {
        return Err(cfg_err("expected a 2×2 matrix"));
    }
    Ok(Mat2::new(m[0][0].into(), m[0][1].into(), m[1][0].into(), m[1][1].into()))
}

fn mat_n(m: &Matrix, size: usize) -> Result<MatN> {
    if m.len() != size || m.iter().any(|r| r.len() != size) {
        return Err(cfg_err(format!("expected a {size}×{size} matrix")));
    }
    Ok(MatN::from_fn(size, |i, j| m[i][j].into()))
}

fn parse_blocks<T: for<'de> Deserialize<'de>>(blocks: &[Value]) -> Result<Vec<T>> {
    blocks.iter().map(|b| serde_json::from_value(b.clone()).map_err(|e| cfg_err(format!("block: {e}")))).collect()
}

/// Non-unitary input is a configuration problem, not a numerical one.
fn as_config(e: Error) -> Error {
    match e {
        Error::NonUnitary { what, defect } => cfg_err(format!("{what} is not unitary (defect {defect:e})")),
        e => e,
    }
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ModelConfig = serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        if cfg.blocks.is_empty() {
            return Err(cfg_err("blocks must not be empty"));
        }
        if cfg.period == Some(0) {
            return Err(cfg_err("period must be positive"));
        }
        if cfg.period.is_some() && cfg.n_shells.is_none() && cfg.kind != ModelKind::Zipper {
            return Err(cfg_err("periodic configs need n_shells"));
        }
        if cfg.n_shells == Some(0) {
            return Err(cfg_err("n_shells must be positive"));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn u(&self) -> C64 {
        self.u.into()
    }

    /// Number of shells the config describes.
    pub fn shells(&self) -> Result<usize> {
        if let Some(n) = self.n_shells {
            return Ok(n);
        }
        Ok(match (self.kind, self.period) {
            (ModelKind::Stroboscopic, None) => self.blocks.len() + 1,
            (_, None) => self.blocks.len(),
            (_, Some(_)) => return Err(cfg_err("periodic configs need n_shells")),
        })
    }

    /// Entry index for level `n` under the period convention.
    fn cycle(&self, n: usize, offset: usize, len: usize) -> Result<usize> {
        match self.period {
            Some(p) => Ok(offset + (n - 1) % p),
            None => {
                let i = n - 1 + offset;
                if i >= len {
                    return Err(cfg_err(format!("level {n} has no block ({len} given)")));
                }
                Ok(i)
            }
        }
    }

    fn zipper_spec(&self, shells: usize) -> Result<ZipperSpec> {
        match self.kind {
            ModelKind::Zipper => {
                let blocks: Vec<ZipperBlock> = parse_blocks(&self.blocks)?;
                // the entry holding V_0, and the offset of the V_1 entry
                let offset = match self.period {
                    Some(p) if blocks.len() == p + 1 => 1,
                    Some(p) if blocks.len() == p => 0,
                    Some(p) => return Err(cfg_err(format!("period {p} needs {p} or {} blocks, got {}", p + 1, blocks.len()))),
                    None => 1,
                };
                let mut v = vec![mat2(&blocks[0].v)?];
                let mut w = Vec::with_capacity(shells);
                for n in 1..shells {
                    let b = &blocks[self.cycle(n, offset, blocks.len())?];
                    v.push(mat2(&b.v)?);
                    w.push(mat2(b.w.as_ref().ok_or_else(|| cfg_err(format!("level {n} block needs W")))?)?);
                }
                Ok(ZipperSpec { v, w })
            }
            ModelKind::Qw1d => {
                let coins = self.coins(shells)?;
                Ok(ZipperSpec { v: coins.iter().map(|c| Mat2::swap() * *c).collect(), w: vec![Mat2::swap(); shells - 1] })
            }
            _ => Err(cfg_err("bands require zipper")),
        }
    }

    fn coins(&self, shells: usize) -> Result<Vec<Mat2>> {
        let coins: Vec<Matrix> = parse_blocks(&self.blocks)?;
        (0..shells)
            .map(|n| {
                let i = match self.period {
                    Some(p) => n % p,
                    None => n,
                };
                mat2(coins.get(i).ok_or_else(|| cfg_err(format!("shell {n} has no coin ({} given)", coins.len())))?)
            })
            .collect()
    }

    /// The model with `shells()` shells.
    pub fn to_model(&self) -> Result<OneChannelModel> {
        let shells = self.shells()?;
        let u = self.u();
        match self.kind {
            ModelKind::Qw1d => build_qw1d(&self.coins(shells)?, u),
            ModelKind::Zipper => build_zipper(&self.zipper_spec(shells)?, u),
            ModelKind::Carbon => {
                let blocks: Vec<CarbonBlock> = parse_blocks(&self.blocks)?;
                let mut sizes = Vec::with_capacity(shells);
                let mut channels = Vec::with_capacity(shells);
                let mut coins = Vec::with_capacity(shells);
                for n in 0..shells {
                    let i = match self.period {
                        Some(p) => n % p,
                        None => n,
                    };
                    let b = blocks.get(i).ok_or_else(|| cfg_err(format!("shell {n} has no block")))?;
                    sizes.push(b.size);
                    channels.push((b.channels[0], b.channels[1]));
                    coins.push(mat_n(&b.coin, b.size)?);
                }
                build_generalized_qw(&sizes, &channels, &coins, u)
            }
            ModelKind::Stroboscopic => {
                let ws: Vec<Matrix> = parse_blocks(&self.blocks)?;
                let n_max = shells - 1;
                let w_seq = (1..=n_max)
                    .map(|n| {
                        let i = self.cycle(n, 0, ws.len())?;
                        mat2(&ws[i])
                    })
                    .collect::<Result<Vec<_>>>()?;
                let sites = match &self.sites {
                    None => SiteChoice::Default,
                    Some(s) => SiteChoice::Explicit { a: s.a.clone(), b: s.b.clone() },
                };
                build_stroboscopic(n_max, &w_seq, &sites, u)
            }
        }
        .map_err(as_config)
    }

    /// The periodic zipper, for zipper and walk configs with a period.
    pub fn periodic_zipper(&self) -> Result<PeriodicZipper> {
        let p = match (self.kind, self.period) {
            (ModelKind::Zipper | ModelKind::Qw1d, Some(p)) => p,
            (ModelKind::Zipper | ModelKind::Qw1d, None) => return Err(cfg_err("bands require a periodic zipper (set period)")),
            _ => return Err(cfg_err("bands require zipper")),
        };
        let spec = self.zipper_spec(p + 1)?;
        PeriodicZipper::new(spec.v[0], spec.v[1..].to_vec(), spec.w, self.u()).map_err(as_config)
    }
}
