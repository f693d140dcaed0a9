//! `aklt percolate`: spanning-cluster probability under random deletion and
//! the 0.5-crossing threshold per mode and side length.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use aklt_core::records::{read_csv, write_csv, write_json, Document, ThresholdRow, THRESHOLDS_KIND};
use aklt_core::reduce::reduce;
use aklt_core::{
    estimate_threshold, threshold_scan, Axis, Boundary, CrossingQuery, DeletionMode, Error as CoreError, Lattice,
    PovmConfig, SimpleGraph, ThresholdCurve,
};

use crate::run_dir::RunDir;
use crate::sample::{chain_jobs, lattices, run_chain, ConfigRow};
use crate::settings::{chain_seed, ChainSettings, ConventionSetting, GridSpec};
use crate::workers::parallel_map;

#[derive(Debug, Clone, Serialize)]
pub struct PercolateConfig {
    pub command: &'static str,
    #[serde(rename = "L")]
    pub sides: Vec<usize>,
    pub boundary: Boundary,
    pub seed: u64,
    pub chain: ChainSettings,
    pub convention: ConventionSetting,
    pub modes: Vec<DeletionMode>,
    pub p_grid: GridSpec,
    pub trials: usize,
    pub level: f64,
    pub axis: Axis,
    /// Configuration files from `aklt sample --save-configs`; empty means
    /// inline sampling.
    pub inputs: Vec<PathBuf>,
    /// Embedded configs of the input files.
    pub sources: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub mode: DeletionMode,
    #[serde(rename = "L")]
    pub side: usize,
    pub n_graphs: usize,
    pub trials: usize,
    /// Fraction of trials spanning with nothing deleted.
    pub p_cluster_at_zero: Option<f64>,
    pub p_star: f64,
    pub uncertainty: f64,
    pub level: f64,
}

type Sample = (SimpleGraph, CrossingQuery);

fn to_sample(lat: &Lattice, cfg: &PovmConfig, axis: Axis) -> Result<Sample> {
    let (part, _, g) = reduce(lat, cfg)?;
    let q = CrossingQuery::from_partition(lat, &part, axis)?;
    Ok((g, q))
}

/// Reads saved configurations and groups them by side length.
pub fn load_configs(
    inputs: &[PathBuf],
) -> Result<(BTreeMap<usize, Vec<PovmConfig>>, Vec<serde_json::Value>, Boundary)> {
    let mut by_side: BTreeMap<usize, Vec<PovmConfig>> = BTreeMap::new();
    let mut sources = Vec::new();
    let mut boundary = None;
    for path in inputs {
        let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        let (pre, rows) = read_csv::<ConfigRow>(file).with_context(|| format!("reading {}", path.display()))?;
        sources.push(pre.config);
        for row in rows {
            match boundary {
                None => boundary = Some(row.boundary),
                Some(b) => ensure!(b == row.boundary, "inputs mix open and periodic boundaries"),
            }
            by_side.entry(row.side).or_default().push(row.config);
        }
    }
    let Some(boundary) = boundary else {
        bail!("input files contain no samples");
    };
    Ok((by_side, sources, boundary))
}

pub fn run(
    cfg: &PercolateConfig,
    configs: Option<BTreeMap<usize, Vec<PovmConfig>>>,
    out_root: &Path,
    threads: usize,
) -> Result<PathBuf> {
    if cfg.boundary == Boundary::Periodic {
        bail!("crossing needs open boundaries; periodic lattices have no left and right sides");
    }
    let grid = cfg.p_grid.points()?;
    let lats = lattices(&cfg.sides, cfg.boundary)?;

    let mut samples: BTreeMap<usize, Vec<Sample>> = BTreeMap::new();
    match configs {
        Some(by_side) => {
            for (side, list) in by_side {
                let lat = &lats[&side];
                let reduced = parallel_map(&list, threads, |c| to_sample(lat, c, cfg.axis))?;
                samples.insert(side, reduced);
            }
        }
        None => {
            let jobs = chain_jobs(&cfg.sides, cfg.seed, cfg.chain.chains);
            let per_chain = parallel_map(&jobs, threads, |job| {
                let lat = &lats[&job.side];
                run_chain(lat, job, &cfg.chain, &cfg.convention)?
                    .into_iter()
                    .map(|(_, c)| to_sample(lat, &c, cfg.axis))
                    .collect::<Result<Vec<_>>>()
            })?;
            for (job, list) in jobs.iter().zip(per_chain) {
                samples.entry(job.side).or_default().extend(list);
            }
        }
    }

    let scans: Vec<(usize, DeletionMode)> = samples
        .keys()
        .flat_map(|&side| cfg.modes.iter().map(move |&m| (side, m)))
        .collect();
    let curves: Vec<ThresholdCurve> = parallel_map(&scans, threads, |&(side, mode)| {
        let seed = chain_seed(cfg.seed ^ 0x7065_7263, side, mode as usize);
        Ok(threshold_scan(&samples[&side], &grid, mode, cfg.trials, seed)?)
    })?;

    let mut entries = Vec::new();
    for (&(side, mode), curve) in scans.iter().zip(&curves) {
        let est = estimate_threshold(curve, cfg.level).map_err(|e| match e {
            CoreError::NoBracket => anyhow::anyhow!("{e} ({mode} deletion, L={side})"),
            other => other.into(),
        })?;
        entries.push(ThresholdEntry {
            mode,
            side,
            n_graphs: samples[&side].len(),
            trials: curve.points[0].trials,
            p_cluster_at_zero: curve.points.iter().find(|p| p.p_delete == 0.0).map(|p| p.p_cluster),
            p_star: est.p_star,
            uncertainty: est.uncertainty,
            level: est.level,
        });
    }
    for e in &entries {
        println!(
            "L={:<4} {:<6} p* = {:.4} +/- {:.4}  ({} graphs x {} trials)",
            e.side, e.mode, e.p_star, e.uncertainty, e.n_graphs, cfg.trials
        );
    }

    let config = serde_json::to_value(cfg)?;
    let mut run = RunDir::create(out_root, cfg.command, &config)?;
    let rows: Vec<ThresholdRow> = scans
        .iter()
        .zip(&curves)
        .flat_map(|(&(side, _), curve)| ThresholdRow::from_curve(side, curve))
        .collect();
    write_csv(run.create_file("threshold.csv")?, &config, &rows)?;
    write_json(
        run.create_file("thresholds.json")?,
        &Document::new(THRESHOLDS_KIND, config.clone(), &entries),
    )?;
    let path = run.finish(&entries)?;
    println!("wrote {}", path.display());
    Ok(path)
}
