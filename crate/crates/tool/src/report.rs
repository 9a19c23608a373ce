//! Output files: CSV tables, JSON reports and the run manifest.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Seventeen significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Rows of strings under a header, written with the csv crate.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub const MANIFEST: &str = "manifest.json";

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Resolved config; `output` is "." meaning the manifest's directory.
    pub config: RunConfig,
    pub config_sha256: String,
    pub seed: u64,
    /// Hash of the input data file or of the generated data.csv.
    pub data_sha256: Option<String>,
}

impl Manifest {
    pub fn new(cfg: &RunConfig, data_sha256: Option<String>) -> Result<Self> {
        let mut config = cfg.clone();
        config.output = PathBuf::from(".");
        let config_sha256 = sha256_hex(serde_json::to_string(&config)?.as_bytes());
        Ok(Self {
            tool: "smcmc".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config,
            config_sha256,
            seed: cfg.seed,
            data_sha256,
        })
    }

    /// Read a manifest and return its config with `output` pointing at the
    /// manifest's directory. Fails if the config hash does not match, or if
    /// an input data file changed since the run.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: Manifest =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let hash = sha256_hex(serde_json::to_string(&m.config)?.as_bytes());
        if hash != m.config_sha256 {
            bail!("{}: config hash mismatch", path.display());
        }
        let mut cfg = m.config;
        cfg.output = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        if let (Some(d), Some(expected)) = (&cfg.data, &m.data_sha256) {
            let bytes = std::fs::read(&d.path).with_context(|| format!("reading {}", d.path.display()))?;
            if &sha256_hex(&bytes) != expected {
                bail!("{} changed since the manifest was written", d.path.display());
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write(&self, outdir: &Path) -> Result<()> {
        write_json(&outdir.join(MANIFEST), self)
    }
}
