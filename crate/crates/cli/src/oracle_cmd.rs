//! `aklt oracle-verify`: exact checks on small fragments.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use aklt_core::oracle::{builtin_fragments, run_suite, FragmentGraph, OracleOptions, OracleReport};
use aklt_core::records::{write_json, Document, ORACLE_KIND};

use crate::run_dir::RunDir;

#[derive(Debug, Clone, Serialize)]
pub struct OracleConfig {
    pub command: &'static str,
    /// Fragment files; empty selects the built-in fragments.
    pub fragments: Vec<PathBuf>,
    pub options: OracleOptions,
}

/// A fragment file holds one fragment object or a list of them.
pub fn load_fragments(paths: &[PathBuf]) -> Result<Vec<FragmentGraph>> {
    if paths.is_empty() {
        return Ok(builtin_fragments());
    }
    let mut out = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
        let items = match value {
            serde_json::Value::Array(items) => items,
            single => vec![single],
        };
        for item in items {
            let fg = FragmentGraph::from_json(&item.to_string()).with_context(|| format!("in {}", path.display()))?;
            out.push(fg);
        }
    }
    Ok(out)
}

pub fn run(cfg: &OracleConfig, fragments: &[FragmentGraph], out_root: &Path) -> Result<(PathBuf, OracleReport)> {
    let report = run_suite(fragments, &cfg.options)?;
    let config = serde_json::to_value(cfg)?;
    let mut run = RunDir::create(out_root, cfg.command, &config)?;
    write_json(
        run.create_file("oracle_report.json")?,
        &Document::new(ORACLE_KIND, config.clone(), &report),
    )?;
    for c in &report.checks {
        println!("{} {:<40} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(sign) = report.star_operator_sign {
        println!("star operator sign: {sign:+}");
    }
    if let Some(enc) = report.encoding {
        println!("encoding: {enc}");
    }
    if let Some(conv) = report.convention {
        println!("weight convention: {conv}");
    }
    let path = run.finish(serde_json::json!({ "passed": report.passed }))?;
    println!("wrote {}", path.display());
    Ok((path, report))
}

pub fn failed_checks(report: &OracleReport) -> Result<()> {
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        bail!("oracle checks failed: {}", failed.join(", "));
    }
    Ok(())
}
