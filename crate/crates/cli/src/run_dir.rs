//! Output directories keyed by a hash of the resolved configuration.

use std::fs::{File, OpenOptions};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use aklt_core::records::SchemaVersion;

/// First 16 hex digits of the SHA-256 of the canonical config JSON.
pub fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(config.to_string().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub struct RunDir {
    path: PathBuf,
    config: Value,
    hash: String,
    files: Vec<String>,
}

impl RunDir {
    /// Creates `<root>/<command>-<hash>`. An existing directory is an error:
    /// outputs are never overwritten.
    pub fn create(root: &Path, command: &str, config: &Value) -> Result<Self> {
        let hash = config_hash(config);
        let path = root.join(format!("{command}-{hash}"));
        if path.exists() {
            bail!(
                "run directory {} already exists; outputs are never overwritten (remove it or change the config)",
                path.display()
            );
        }
        std::fs::create_dir_all(&path).with_context(|| format!("cannot create {}", path.display()))?;
        Ok(Self {
            path,
            config: config.clone(),
            hash,
            files: Vec::new(),
        })
    }

    /// Opens a new file in the run directory; fails if it already exists.
    pub fn create_file(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.path.join(name);
        let file = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        self.files.push(name.to_owned());
        Ok(BufWriter::new(file))
    }

    /// Writes `run.json`, the only artifact carrying a timestamp.
    pub fn finish(mut self, summary: impl Serialize) -> Result<PathBuf> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let meta = json!({
            "schema": format!("run/{}", SchemaVersion::CURRENT),
            "config": self.config,
            "config_hash": self.hash,
            "version": env!("CARGO_PKG_VERSION"),
            "created_unix": created,
            "files": self.files,
            "summary": summary,
        });
        let mut out = self.create_file("run.json")?;
        serde_json::to_writer_pretty(&mut out, &meta)?;
        std::io::Write::write_all(&mut out, b"\n")?;
        Ok(self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_content_only() {
        let a = json!({"seed": 1, "L": [4]});
        let b = json!({"L": [4], "seed": 1});
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_ne!(config_hash(&a), config_hash(&json!({"seed": 2, "L": [4]})));
        assert_eq!(config_hash(&a).len(), 16);
    }

    #[test]
    fn existing_directories_are_not_reused() {
        let root = tempfile::tempdir().unwrap();
        let cfg = json!({"seed": 1});
        let mut run = RunDir::create(root.path(), "sample", &cfg).unwrap();
        run.create_file("x.csv").unwrap();
        assert!(run.create_file("x.csv").is_err());
        run.finish(json!(null)).unwrap();
        assert!(RunDir::create(root.path(), "sample", &cfg).is_err());
    }
}
