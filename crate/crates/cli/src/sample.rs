//! `aklt sample`: Metropolis chains per side length, per-sample records and
//! a per-L summary.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Value};

use aklt_core::records::{CsvSink, Fields, SampleRow};
use aklt_core::stats::accumulate;
use aklt_core::{build_honeycomb, sample_chain, Boundary, CsvRecord, Estimate, Lattice, PovmConfig, SampleRecord};

use crate::run_dir::RunDir;
use crate::settings::{chain_seed, ChainSettings, ConventionSetting};
use crate::workers::parallel_map;

#[derive(Debug, Clone, Serialize)]
pub struct SampleConfig {
    pub command: &'static str,
    #[serde(rename = "L")]
    pub sides: Vec<usize>,
    pub boundary: Boundary,
    pub seed: u64,
    pub chain: ChainSettings,
    pub convention: ConventionSetting,
    pub save_configs: bool,
}

/// Raw outcome configuration of one sample, for later percolation runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigRow {
    pub side: usize,
    pub boundary: Boundary,
    pub seed: u64,
    pub sweep: usize,
    pub config: PovmConfig,
}

impl CsvRecord for ConfigRow {
    const KIND: &'static str = "configs";
    const COLUMNS: &'static [&'static str] = &["L", "boundary", "seed", "sweep", "outcomes"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.side.to_string(),
            self.boundary.to_string(),
            self.seed.to_string(),
            self.sweep.to_string(),
            self.config.to_string(),
        ]
    }

    fn from_fields(f: &Fields<'_>) -> aklt_core::Result<Self> {
        let labels: String = f.get("outcomes")?;
        Ok(Self {
            side: f.get("L")?,
            boundary: f.get("boundary")?,
            seed: f.get("seed")?,
            sweep: f.get("sweep")?,
            config: PovmConfig::parse(&labels)?,
        })
    }
}

/// One chain's worth of work.
#[derive(Debug, Clone, Copy)]
pub struct ChainJob {
    pub side: usize,
    pub index: usize,
    pub seed: u64,
}

pub fn chain_jobs(sides: &[usize], master: u64, chains: usize) -> Vec<ChainJob> {
    sides
        .iter()
        .flat_map(|&side| {
            (0..chains).map(move |index| ChainJob {
                side,
                index,
                seed: chain_seed(master, side, index),
            })
        })
        .collect()
}

/// Runs one chain and returns `(row, configuration)` per sample.
pub fn run_chain(
    lat: &Lattice,
    job: &ChainJob,
    chain: &ChainSettings,
    convention: &ConventionSetting,
) -> Result<Vec<(SampleRow, PovmConfig)>> {
    let params = chain.params(job.seed, convention.resolved, job.index);
    let mut out = Vec::with_capacity(params.n_samples);
    for s in sample_chain(lat, params)? {
        let s = s?;
        let record = SampleRecord::measure(lat, &s.config)?;
        out.push((SampleRow::new(job.seed, &s, record), s.config));
    }
    Ok(out)
}

pub fn lattices(sides: &[usize], boundary: Boundary) -> Result<BTreeMap<usize, Lattice>> {
    sides.iter().map(|&l| Ok((l, build_honeycomb(l, boundary)?))).collect()
}

pub fn run(cfg: &SampleConfig, out_root: &std::path::Path, threads: usize) -> Result<PathBuf> {
    let config = serde_json::to_value(cfg)?;
    let lats = lattices(&cfg.sides, cfg.boundary)?;
    let jobs = chain_jobs(&cfg.sides, cfg.seed, cfg.chain.chains);
    let results = parallel_map(&jobs, threads, |job| {
        run_chain(&lats[&job.side], job, &cfg.chain, &cfg.convention)
    })?;

    let mut run = RunDir::create(out_root, cfg.command, &config)?;
    let mut samples = CsvSink::<SampleRow, _>::new(run.create_file("samples.csv")?, &config)?;
    let mut configs = match cfg.save_configs {
        true => Some(CsvSink::<ConfigRow, _>::new(run.create_file("configs.csv")?, &config)?),
        false => None,
    };
    let mut by_side: BTreeMap<usize, Vec<SampleRecord>> = BTreeMap::new();
    for chain in &results {
        for (row, outcomes) in chain {
            samples.push(row)?;
            if let Some(sink) = configs.as_mut() {
                sink.push(&ConfigRow {
                    side: row.record.side,
                    boundary: row.record.boundary,
                    seed: row.seed,
                    sweep: row.sweep,
                    config: outcomes.clone(),
                })?;
            }
            by_side.entry(row.record.side).or_default().push(row.record.clone());
        }
    }
    let n_rows = samples.rows();
    samples.finish()?;
    if let Some(sink) = configs {
        sink.finish()?;
    }

    let mut estimates: Vec<Estimate> = Vec::new();
    for records in by_side.values() {
        if records.len() < 2 {
            eprintln!("note: L={} has a single sample; no summary row", records[0].side);
            continue;
        }
        estimates.extend(accumulate(records)?);
    }
    aklt_core::records::write_csv(run.create_file("summary.csv")?, &config, &estimates)?;
    print_summary(&estimates);
    let path = run.finish(summary_json(n_rows, &estimates))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn summary_json(rows: usize, estimates: &[Estimate]) -> Value {
    json!({ "sample_rows": rows, "estimates": estimates.len() })
}

fn print_summary(estimates: &[Estimate]) {
    for e in estimates {
        println!(
            "L={:<4} {:<20} {:.5} +/- {:.5}  (n={})",
            e.side,
            e.observable.name(),
            e.mean,
            e.stderr,
            e.n_samples
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use aklt_core::records::{read_csv, to_csv_string};

    #[test]
    fn config_rows_round_trip() {
        let row = ConfigRow {
            side: 2,
            boundary: Boundary::Open,
            seed: 5,
            sweep: 12,
            config: PovmConfig::parse("xyzz").unwrap(),
        };
        let text = to_csv_string(&json!({}), std::slice::from_ref(&row)).unwrap();
        assert!(text.contains("2,open,5,12,xyzz\n"));
        assert_eq!(read_csv::<ConfigRow>(text.as_bytes()).unwrap().1, vec![row]);
    }

    #[test]
    fn jobs_cover_every_side_and_chain() {
        let jobs = chain_jobs(&[4, 8], 1, 3);
        assert_eq!(jobs.len(), 6);
        assert_eq!((jobs[4].side, jobs[4].index), (8, 1));
    }
}
