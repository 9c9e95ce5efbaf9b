//! Density sweeps over the unit circle built from transfer products.
//!
//! The boundary spectral measure is approximated at level `n` by
//! `dφ / (π‖T_{e^{iφ},[0,n]}(u;1)‖²)`. Its Poisson extension inside the disk
//! has the exact form `(|A|² − |B|²)/|Au + B|²` in the top row of the product.

use crate::error::Result;
use crate::finite::{assemble, spectrum as finite_spectrum};
use crate::mat2core::{c, cis, C64};
use crate::model::OneChannelModel;
use crate::numeric::{angle_distance, angle_grid, TAU};
use crate::transfer::{exceptional_angles, transfer_product};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

/// Nodes closer than this to an exceptional angle trigger the half-step shift.
const NODE_CLEARANCE: f64 = 1e-9;

/// Density values on a uniform angle grid; `None` marks a masked node.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub angles: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub level: usize,
    pub u: C64,
}

impl DensityGrid {
    /// Trapezoid mass over the full circle; masked nodes count as zero.
    pub fn mass(&self) -> f64 {
        crate::numeric::periodic_trapezoid(&self.values.iter().map(|v| v.unwrap_or(0.0)).collect::<Vec<_>>())
    }

    pub fn masked_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// L¹ distance to another grid on the same nodes; masked nodes in either are skipped.
    pub fn l1_distance(&self, other: &DensityGrid) -> f64 {
        let h = TAU / self.angles.len() as f64;
        self.values
            .iter()
            .zip(&other.values)
            .filter_map(|(a, b)| Some((a.as_ref()? - b.as_ref()?).abs()))
            .sum::<f64>()
            * h
    }

    /// CSV with header `phi,density,masked`; masked rows leave the density empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "phi,density,masked")?;
        for (phi, v) in self.angles.iter().zip(&self.values) {
            match v {
                Some(x) => writeln!(out, "{phi:.16e},{x:.16e},0")?,
                None => writeln!(out, "{phi:.16e},,1")?,
            }
        }
        Ok(())
    }
}

/// A uniform grid of `size` nodes, shifted by half a step if a node would sit
/// on one of `avoid`. Returns the nodes and the step.
fn clear_grid(size: usize, avoid: &[f64]) -> Vec<f64> {
    let h = TAU / size as f64;
    let hits = |offset: f64| {
        avoid.iter().any(|&a| {
            let k = ((a - offset) / h).round();
            angle_distance(offset + k * h, a) < NODE_CLEARANCE
        })
    };
    let offset = if hits(0.0) { 0.5 * h } else { 0.0 };
    angle_grid(size, offset)
}

fn exceptional_nodes(model: &OneChannelModel, n: usize, size: usize) -> Result<Vec<f64>> {
    let set = exceptional_angles(model, n, size.clamp(256, 4096))?;
    Ok(set.angles())
}

/// `1/(π‖T_{e^{iφ},[0,n]}(u;1)‖²)` on a uniform grid of `grid_size` angles.
///
/// Angles where the product is exceptional are masked.
pub fn carmona_density(model: &OneChannelModel, u: C64, n: usize, grid_size: usize) -> Result<DensityGrid> {
    let avoid = exceptional_nodes(model, n, grid_size)?;
    let angles = clear_grid(grid_size, &avoid);
    let values = angles
        .par_iter()
        .map(|&phi| {
            let t = transfer_product(model, cis(phi), n, false)?;
            if t.exceptional {
                return Ok(None);
            }
            let w = t.matrix.apply([u, c(1.0, 0.0)]);
            let nsq = w[0].norm_sqr() + w[1].norm_sqr();
            let v = (-2.0 * t.log_scale).exp() / (PI * nsq);
            Ok(v.is_finite().then_some(v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityGrid { angles, values, level: n, u })
}

/// Trapezoid value of `∫_{φ₀}^{φ₁} ‖T_{e^{iφ},[0,n]}‖^{2p} dφ` on `grid_size + 1` nodes.
///
/// Exceptional nodes contribute nothing.
pub fn ls_integral(model: &OneChannelModel, p: f64, phi0: f64, phi1: f64, n: usize, grid_size: usize) -> Result<f64> {
    let m = grid_size.max(1);
    let h = (phi1 - phi0) / m as f64;
    let vals = (0..=m)
        .into_par_iter()
        .map(|k| {
            let t = transfer_product(model, cis(phi0 + h * k as f64), n, false)?;
            if t.exceptional {
                return Ok(0.0);
            }
            let w = if k == 0 || k == m { 0.5 } else { 1.0 };
            Ok(w * (2.0 * p * t.log_norm()).exp())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(h * vals.iter().sum::<f64>())
}

/// Largest violation of `1/‖T(u;1)‖² ≤ ‖T‖²` over the given angles.
pub fn density_floor_bound(model: &OneChannelModel, u: C64, n: usize, grid: &[f64]) -> Result<f64> {
    let worst = grid
        .par_iter()
        .map(|&phi| {
            let t = transfer_product(model, cis(phi), n, false)?;
            if t.exceptional {
                return Ok(0.0);
            }
            let w = t.matrix.apply([u, c(1.0, 0.0)]);
            let lhs = (-2.0 * t.log_scale).exp() / (w[0].norm_sqr() + w[1].norm_sqr());
            let rhs = (2.0 * t.log_norm()).exp();
            Ok((lhs - rhs).max(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// Where [`poisson_transform`] takes its boundary data from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonSource {
    /// Top row of the transfer product at level `n`.
    Transfer(usize),
    /// Dense eigen-decomposition of the level-`n` truncation, averaged over
    /// the outer boundary phase.
    FiniteVolume(usize),
}

/// The Poisson extension `P(re^{iφ})` of the boundary measure, divided by
/// `2π` so that it is a density in `dφ` comparable with [`carmona_density`].
///
/// As `r → 1` it tends to `1/(π‖T(u;1)‖²)` at non-exceptional angles; at
/// `r → 0` it tends to `1/2π`.
pub fn poisson_transform(model: &OneChannelModel, u: C64, source: PoissonSource, r: f64, grid_size: usize) -> Result<DensityGrid> {
    let angles = angle_grid(grid_size, 0.0);
    let (level, values) = match source {
        PoissonSource::Transfer(n) => {
            let values = angles
                .par_iter()
                .map(|&phi| {
                    let t = transfer_product(model, cis(phi) * r, n, false)?;
                    if t.exceptional {
                        return Ok(None);
                    }
                    let (a, b) = (t.matrix.a11, t.matrix.a12);
                    let p = (a.norm_sqr() - b.norm_sqr()) / (a * u + b).norm_sqr();
                    Ok(p.is_finite().then_some(p / TAU))
                })
                .collect::<Result<Vec<_>>>()?;
            (n, values)
        }
        PoissonSource::FiniteVolume(n) => {
            let sp = finite_spectrum(&assemble(model, n, u, c(1.0, 0.0), false)?)?;
            let values = angles.par_iter().map(|&phi| Some(sp.averaged_poisson(cis(phi) * r) / TAU)).collect();
            (n, values)
        }
    };
    Ok(DensityGrid { angles, values, level, u })
}
