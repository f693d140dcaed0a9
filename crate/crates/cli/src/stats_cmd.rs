//! `aklt stats`: per-L summaries and infinite-size extrapolation from sample
//! CSV files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};

use aklt_core::records::{read_csv, write_csv, write_json, Document, SampleRow, EXTRAPOLATION_KIND};
use aklt_core::{
    accumulate, extrapolate_infinite, fit_log_growth, Ansatz, Estimate, Extrapolation, Observable, SampleRecord,
};

use crate::run_dir::RunDir;

#[derive(Debug, Clone, Serialize)]
pub struct StatsConfig {
    pub command: &'static str,
    pub inputs: Vec<PathBuf>,
    pub ansatz: Ansatz,
    /// Embedded configs of the input files.
    pub sources: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    #[serde(rename = "L")]
    pub side: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableFit {
    pub observable: Observable,
    pub points: Vec<FitPoint>,
    pub fit: Option<Extrapolation>,
    pub error: Option<String>,
}

/// `max_domain_size ~ slope * ln N + intercept` over the per-L means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub n_sites: Vec<usize>,
    pub mean_max_domain_size: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationData {
    pub ansatz: Ansatz,
    pub observables: Vec<ObservableFit>,
    pub max_domain_growth: Option<GrowthFit>,
}

pub fn load_samples(inputs: &[PathBuf]) -> Result<(BTreeMap<usize, Vec<SampleRecord>>, Vec<serde_json::Value>)> {
    let mut by_side: BTreeMap<usize, Vec<SampleRecord>> = BTreeMap::new();
    let mut sources = Vec::new();
    let mut boundary = None;
    for path in inputs {
        let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        let (pre, rows) = read_csv::<SampleRow>(file).with_context(|| format!("reading {}", path.display()))?;
        sources.push(pre.config);
        for row in rows {
            let b = *boundary.get_or_insert(row.record.boundary);
            ensure!(b == row.record.boundary, "inputs mix open and periodic boundaries");
            by_side.entry(row.record.side).or_default().push(row.record);
        }
    }
    ensure!(!by_side.is_empty(), "input files contain no samples");
    Ok((by_side, sources))
}

pub fn summarize(
    by_side: &BTreeMap<usize, Vec<SampleRecord>>,
    ansatz: Ansatz,
) -> Result<(Vec<Estimate>, ExtrapolationData)> {
    let mut estimates = Vec::new();
    for records in by_side.values() {
        estimates.extend(accumulate(records)?);
    }
    let observables = Observable::ALL
        .iter()
        .map(|&obs| {
            let points: Vec<FitPoint> = estimates
                .iter()
                .filter(|e| e.observable == obs)
                .map(|e| FitPoint {
                    side: e.side,
                    mean: e.mean,
                    stderr: e.stderr,
                })
                .collect();
            let triples: Vec<(f64, f64, f64)> = points.iter().map(|p| (p.side as f64, p.mean, p.stderr)).collect();
            let (fit, error) = match extrapolate_infinite(&triples, ansatz) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ObservableFit {
                observable: obs,
                points,
                fit,
                error,
            }
        })
        .collect();

    let n_sites: Vec<usize> = by_side.values().map(|r| r[0].n_sites).collect();
    let mean_max: Vec<f64> = estimates
        .iter()
        .filter(|e| e.observable == Observable::MaxDomainSize)
        .map(|e| e.mean)
        .collect();
    let pairs: Vec<(f64, f64)> = n_sites.iter().zip(&mean_max).map(|(&n, &s)| (n as f64, s)).collect();
    let max_domain_growth = fit_log_growth(&pairs).ok().map(|f| GrowthFit {
        n_sites,
        mean_max_domain_size: mean_max,
        slope: f.a,
        intercept: f.b,
        residual_norm: f.residual_norm,
    });
    Ok((
        estimates,
        ExtrapolationData {
            ansatz,
            observables,
            max_domain_growth,
        },
    ))
}

pub fn run(cfg: &StatsConfig, by_side: &BTreeMap<usize, Vec<SampleRecord>>, out_root: &Path) -> Result<PathBuf> {
    let (estimates, data) = summarize(by_side, cfg.ansatz)?;
    let config = serde_json::to_value(cfg)?;
    let mut run = RunDir::create(out_root, cfg.command, &config)?;
    write_csv(run.create_file("summary.csv")?, &config, &estimates)?;
    write_json(
        run.create_file("extrapolation.json")?,
        &Document::new(EXTRAPOLATION_KIND, config.clone(), &data),
    )?;
    for f in &data.observables {
        match &f.fit {
            Some(fit) => println!(
                "{:<20} L->inf {:.5} +/- {:.5}  (chi2/dof {:.3})",
                f.observable.name(),
                fit.limit,
                fit.limit_stderr,
                fit.reduced_chi2
            ),
            None => println!(
                "{:<20} no extrapolation: {}",
                f.observable.name(),
                f.error.as_deref().unwrap_or("")
            ),
        }
    }
    if let Some(g) = &data.max_domain_growth {
        println!("max_domain_size      = {:.4} ln N + {:.4}", g.slope, g.intercept);
    }
    let path = run.finish(serde_json::json!({ "estimates": estimates.len() }))?;
    println!("wrote {}", path.display());
    Ok(path)
}
