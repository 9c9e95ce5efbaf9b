//! The `onechannel` command line.
//!
//! Every command writes its CSV outputs plus a `manifest.json` into `--out`.
//! Exit codes: 0 ok, 1 selftest failure, 2 usage or config, 3 numeric.

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::mat2core::{c, phi_sharp, C64};
use crate::periodic::band_set;
use crate::random::{fourth_moment_curve, write_moment_csv, EnsembleConfig, EnsembleManifest};
use crate::selftest::{self, Scale};
use crate::spectrum::carmona_density;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "onechannel", version, about = "Spectral analysis of one-channel unitary operators")]
pub struct Cli {
    /// Worker threads (defaults to ONECHANNEL_THREADS, then all cores).
    #[arg(long, global = true, env = "ONECHANNEL_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Carmona density on a uniform angle grid.
    Density(DensityArgs),
    /// Bands and isolated eigenvalues of a periodic zipper.
    Bands(BandsArgs),
    /// Fourth-moment curves of a random perturbation ensemble.
    Ensemble(EnsembleArgs),
    /// Run the oracle suites and print a JSON report.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    pub config: PathBuf,
    /// Transfer level.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    /// Boundary phase as `re,im` (defaults to the config value).
    #[arg(long, value_parser = parse_complex)]
    pub u: Option<C64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BandsArgs {
    pub config: PathBuf,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    pub config: PathBuf,
    /// Decay exponent of the perturbation strength.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Perturbation amplitude.
    #[arg(long, default_value_t = 0.1)]
    pub c: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Numbers of periods at which to evaluate the moment.
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    pub periods: Vec<usize>,
    /// Angle inside a band (defaults to the middle of the widest arc).
    #[arg(long)]
    pub phi: Option<f64>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use non-decaying perturbations instead.
    #[arg(long)]
    pub control: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, value_enum, default_value_t = Scale::Small)]
    pub scale: Scale,
}

/// Accompanies every set of output files.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the config file bytes.
    pub config_digest: String,
    pub seed: Option<u64>,
    pub grid_sizes: Vec<usize>,
    pub tool_version: String,
    pub wall_time: f64,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleManifest>,
}

fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(c(num(re)?, 0.0)),
        [re, im] => Ok(c(num(re)?, num(im)?)),
        _ => Err(format!("expected re,im, got {s:?}")),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERIC
    }
}

fn load(path: &Path) -> Result<(ModelConfig, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Config("config is not UTF-8".into()))?;
    Ok((ModelConfig::parse(&text)?, hex(&Sha256::digest(&bytes))))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let mut f = create(dir, "manifest.json")?;
    serde_json::to_writer_pretty(&mut f, manifest).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

fn manifest(command: &str, digest: String, seed: Option<u64>, grid_sizes: Vec<usize>, outputs: &[&str], start: Instant) -> RunManifest {
    RunManifest {
        command: command.into(),
        config_digest: digest,
        seed,
        grid_sizes,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        wall_time: start.elapsed().as_secs_f64(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        ensemble: None,
    }
}

pub fn cmd_density(a: &DensityArgs) -> Result<()> {
    let start = Instant::now();
    let (cfg, digest) = load(&a.config)?;
    let model = cfg.to_model()?;
    let top = model.max_level().unwrap_or(0);
    if a.n > top {
        return Err(Error::Config(format!("--n {} exceeds the {} levels the config describes", a.n, top)));
    }
    if let Some(e) = model.first_failure(a.n) {
        return Err(e);
    }
    let density = carmona_density(&model, a.u.unwrap_or(cfg.u()), a.n, a.grid)?;
    let mut f = create(&a.out, "density.csv")?;
    density.write_csv(&mut f)?;
    f.flush()?;
    write_manifest(&a.out, &manifest("density", digest, cfg.seed, vec![a.grid], &["density.csv"], start))
}

pub fn cmd_bands(a: &BandsArgs) -> Result<()> {
    let start = Instant::now();
    let (cfg, digest) = load(&a.config)?;
    let zp = cfg.periodic_zipper()?;
    let bands = band_set(&zp, a.grid, 1e-10)?;
    let mut f = create(&a.out, "bands.csv")?;
    bands.write_arcs_csv(&mut f)?;
    f.flush()?;
    let mut f = create(&a.out, "point_spectrum.csv")?;
    bands.write_point_csv(&mut f)?;
    f.flush()?;
    write_manifest(&a.out, &manifest("bands", digest, cfg.seed, vec![a.grid], &["bands.csv", "point_spectrum.csv"], start))
}

pub fn cmd_ensemble(a: &EnsembleArgs) -> Result<()> {
    let start = Instant::now();
    let (cfg, digest) = load(&a.config)?;
    let base = cfg.periodic_zipper()?;
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let n_max = a.periods.iter().max().copied().unwrap_or(0) * base.period();
    let ens = if a.control {
        EnsembleConfig::control(base, a.c, a.samples, seed, n_max)?
    } else {
        EnsembleConfig::new(base, a.alpha, a.c, a.samples, seed, n_max)?
    };
    let phi = match a.phi {
        Some(phi) => phi,
        None => {
            let bands = band_set(&ens.base, 4096, 1e-10)?;
            let (lo, hi) = bands
                .arcs
                .iter()
                .copied()
                .max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)))
                .ok_or(Error::EmptyBandSet)?;
            0.5 * (lo + hi)
        }
    };
    let curve = fourth_moment_curve(&ens, phi, &a.periods, a.samples)?;
    let mut f = create(&a.out, "moments.csv")?;
    write_moment_csv(&curve, &mut f)?;
    f.flush()?;
    let mut m = manifest("ensemble", digest, Some(seed), vec![a.samples], &["moments.csv"], start);
    m.ensemble = Some(EnsembleManifest::new(&ens, phi, &a.periods));
    write_manifest(&a.out, &m)
}

/// Runs the suites with the given `φ♯`; prints the report and returns the exit code.
pub fn cmd_selftest<W: Write>(scale: Scale, phi: selftest::PhiSharp, mut out: W) -> i32 {
    let report = selftest::run(scale, phi);
    let _ = serde_json::to_writer_pretty(&mut out, &report);
    let _ = writeln!(out);
    if report.passed {
        EXIT_OK
    } else {
        eprintln!("failing suites: {}", report.failing().join(", "));
        EXIT_SELFTEST
    }
}

fn dispatch(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Density(a) => cmd_density(a),
        Command::Bands(a) => cmd_bands(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Selftest(a) => return cmd_selftest(a.scale, phi_sharp, std::io::stdout().lock()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be positive");
            EXIT_CONFIG
        }
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_NUMERIC
            }
        },
        None => dispatch(&cli),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_flag() {
        assert_eq!(parse_complex("0.5,-1").unwrap(), c(0.5, -1.0));
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert!(parse_complex("1,2,3").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["onechannel", "density"]), EXIT_CONFIG);
        assert_eq!(run(["onechannel", "bogus"]), EXIT_CONFIG);
        assert_eq!(run(["onechannel", "--help"]), EXIT_OK);
    }

    #[test]
    fn missing_config_exits_two() {
        assert_eq!(run(["onechannel", "bands", "/nonexistent/cfg.json"]), EXIT_CONFIG);
    }
}
