//! Run configuration: a JSON file of optional keys, overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use aklt_core::oracle::{hexagon, torus2, verify_weight_convention, OracleOptions};
use aklt_core::{build_honeycomb, p_grid, Ansatz, Axis, Boundary, ChainParams, DeletionMode, WeightConvention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConventionChoice {
    #[default]
    Multigraph,
    Simple,
    /// Decide with the exact weight oracle on the hexagon and the L=2 torus.
    Auto,
}

/// Keys accepted in a `--config` file. All are optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    #[serde(rename = "L")]
    pub sides: Option<Vec<usize>>,
    pub boundary: Option<Boundary>,
    pub seed: Option<u64>,
    pub burn_in: Option<usize>,
    pub n_samples: Option<usize>,
    pub thinning: Option<usize>,
    pub chains: Option<usize>,
    pub convention: Option<ConventionChoice>,
    pub modes: Option<Vec<DeletionMode>>,
    pub p_grid: Option<String>,
    pub trials: Option<usize>,
    pub level: Option<f64>,
    pub axis: Option<Axis>,
    pub inputs: Option<Vec<PathBuf>>,
    pub ansatz: Option<Ansatz>,
    pub fragments: Option<Vec<PathBuf>>,
    pub save_configs: Option<bool>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>, command: &str) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: FileConfig =
            serde_json::from_str(&text).with_context(|| format!("invalid config file {}", path.display()))?;
        if let Some(c) = &cfg.command {
            ensure!(c == command, "config file is for command '{c}', not '{command}'");
        }
        Ok(cfg)
    }
}

/// Flag value if given, else file value, else default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn pick_list<T>(flag: Vec<T>, file: Option<Vec<T>>, default: Vec<T>) -> Vec<T> {
    if !flag.is_empty() {
        flag
    } else {
        file.unwrap_or(default)
    }
}

pub const DEFAULT_OUT: &str = "runs";
pub const DEFAULT_GRID: &str = "0:0.6:0.02";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        ensure!(parts.len() == 3, "p-grid must be start:stop:step, got {s:?}");
        let num = |x: &str| -> Result<f64> { x.trim().parse().with_context(|| format!("bad number {x:?} in p-grid")) };
        let spec = Self {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            step: num(parts[2])?,
        };
        spec.points()?;
        Ok(spec)
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        Ok(p_grid(self.start, self.stop, self.step)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConventionSetting {
    pub requested: ConventionChoice,
    pub resolved: WeightConvention,
}

impl ConventionSetting {
    pub fn resolve(requested: ConventionChoice) -> Result<Self> {
        let resolved = match requested {
            ConventionChoice::Multigraph => WeightConvention::Multigraph,
            ConventionChoice::Simple => WeightConvention::Simple,
            ConventionChoice::Auto => {
                verify_weight_convention(&[hexagon(), torus2()])
                    .context("weight-convention oracle failed")?
                    .resolved
            }
        };
        Ok(Self { requested, resolved })
    }
}

/// Chain schedule shared by every side length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainSettings {
    pub burn_in: usize,
    pub n_samples: usize,
    pub thinning: usize,
    /// Independent chains per side length; samples are split between them.
    pub chains: usize,
}

impl ChainSettings {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.n_samples >= 1, "samples must be at least 1");
        ensure!(self.thinning >= 1, "thinning must be at least 1");
        ensure!(self.chains >= 1, "chains must be at least 1");
        ensure!(
            self.chains <= self.n_samples,
            "chains ({}) exceeds samples ({})",
            self.chains,
            self.n_samples
        );
        Ok(())
    }

    /// Sample count of chain `k`; the remainder goes to the first chains.
    pub fn samples_in_chain(&self, k: usize) -> usize {
        self.n_samples / self.chains + usize::from(k < self.n_samples % self.chains)
    }

    pub fn params(&self, seed: u64, convention: WeightConvention, k: usize) -> ChainParams {
        ChainParams {
            seed,
            burn_in: self.burn_in,
            n_samples: self.samples_in_chain(k),
            thinning: self.thinning,
            convention,
        }
    }
}

pub fn validate_sides(sides: &[usize], boundary: Boundary) -> Result<()> {
    ensure!(!sides.is_empty(), "no side lengths given (use --L)");
    for &l in sides {
        build_honeycomb(l, boundary)?;
    }
    let mut sorted = sides.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    ensure!(sorted.len() == sides.len(), "duplicate side length in {sides:?}");
    Ok(())
}

/// Seed of chain `k` at side `l`, decorrelated from the master seed.
pub fn chain_seed(master: u64, side: usize, k: usize) -> u64 {
    splitmix(splitmix(master ^ splitmix(side as u64)) ^ k as u64)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn oracle_options(seed: u64, povm_constant: Option<f64>) -> Result<OracleOptions> {
    let mut opts = OracleOptions {
        seed,
        ..OracleOptions::default()
    };
    if let Some(c) = povm_constant {
        if !(c.is_finite() && c > 0.0) {
            bail!("POVM constant must be positive, got {c}");
        }
        opts.povm_scale = c;
    }
    Ok(opts)
}

pub fn check_inputs(inputs: &[PathBuf]) -> Result<()> {
    for p in inputs {
        ensure!(p.is_file(), "input file {} not found", p.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = GridSpec::parse(DEFAULT_GRID).unwrap();
        assert_eq!(g.points().unwrap().len(), 31);
        assert_eq!(GridSpec::parse("0:0:0.02").unwrap().points().unwrap(), vec![0.0]);
        assert!(GridSpec::parse("0:0.5").is_err());
        assert!(GridSpec::parse("0.5:0.1:0.1").is_err());
        assert!(GridSpec::parse("0:2:0.5").is_err());
    }

    #[test]
    fn chains_split_samples() {
        let c = ChainSettings {
            burn_in: 0,
            n_samples: 10,
            thinning: 1,
            chains: 3,
        };
        let total: usize = (0..3).map(|k| c.samples_in_chain(k)).sum();
        assert_eq!(total, 10);
        assert_eq!(c.samples_in_chain(0), 4);
        assert!(ChainSettings { chains: 11, ..c }.validate().is_err());
    }

    #[test]
    fn chain_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..4)
            .flat_map(|k| [2usize, 4, 6].map(|l| chain_seed(7, l, k)))
            .collect();
        assert_eq!(seeds.len(), 12);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"L": [4], "sead": 3}"#).unwrap();
        assert!(FileConfig::load(Some(&path), "sample").is_err());
        std::fs::write(&path, r#"{"command": "stats"}"#).unwrap();
        assert!(FileConfig::load(Some(&path), "sample").is_err());
        std::fs::write(&path, r#"{"L": [4, 6], "seed": 3, "convention": "auto"}"#).unwrap();
        let cfg = FileConfig::load(Some(&path), "sample").unwrap();
        assert_eq!(cfg.sides, Some(vec![4, 6]));
        assert_eq!(cfg.convention, Some(ConventionChoice::Auto));
    }
}
