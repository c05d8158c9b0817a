use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Format, Invocation};

/// Fixed 17-significant-digit rendering used in every CSV.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// An output directory that remembers what was written into it.
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, data).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<S: Serialize + ?Sized>(&mut self, name: &str, value: &S) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.bytes(name, &text)
    }

    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        let data = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.bytes(name, &data)
    }

    /// Writes `stem.csv` or `stem.json` (`{"columns": [...], "rows": [[...]]}`).
    pub fn series(
        &mut self,
        stem: &str,
        format: Format,
        columns: &[String],
        rows: &[Vec<f64>],
    ) -> Result<()> {
        match format {
            Format::Csv => {
                let text: Vec<Vec<String>> =
                    rows.iter().map(|r| r.iter().map(|&x| num(x)).collect()).collect();
                self.csv(&format!("{stem}.csv"), columns, &text)
            }
            Format::Json => self.json(
                &format!("{stem}.json"),
                &serde_json::json!({ "columns": columns, "rows": rows }),
            ),
        }
    }

    /// Writes `manifest.json` last, listing everything written before it.
    pub fn finish(mut self, manifest: Manifest) -> Result<()> {
        let manifest = Manifest { outputs: std::mem::take(&mut self.written), ..manifest };
        self.json("manifest.json", &manifest)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_file: String,
    /// SHA-256 of the config bytes exactly as read.
    pub config_sha256: String,
    pub seed: u64,
    pub format: Format,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub positive_2d_probe: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<serde_json::Value>,
    pub outputs: Vec<String>,
}

impl Invocation {
    pub fn manifest(&self, seed: u64) -> Manifest {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config_file: self.config_file.display().to_string(),
            config_sha256: sha256_hex(&self.raw),
            seed,
            format: self.format,
            positive_2d_probe: self.positive_2d_probe,
            run: None,
            outputs: Vec::new(),
        }
    }
}
