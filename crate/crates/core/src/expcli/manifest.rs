//! Run manifests and the output sink that fills them.
//!
//! A manifest uses the configuration format. Keys:
//! `experiment`, `status`, `noise_generator`, `config.<key>` (the full
//! effective configuration), `seed.<name>`, `opnorm.<name>`,
//! `file.<relative path> = sha256:<hex>` and `stat.<name>`.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::config::{parse_kv, Experiment, ExperimentConfig};
use super::noise::NOISE_GENERATOR;
use crate::error::{Error, Result};
use crate::field::io::{fmt_f64, write_text};

pub const MANIFEST_NAME: &str = "manifest.txt";

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub experiment: Experiment,
    pub status: String,
    pub config: Vec<(String, String)>,
    pub seeds: Vec<(String, u64)>,
    pub opnorms: Vec<(String, f64)>,
    pub files: Vec<ManifestFile>,
    pub stats: Vec<(String, String)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: cfg.experiment(),
            status: "running".into(),
            config: cfg.entries().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            seeds: Vec::new(),
            opnorms: Vec::new(),
            files: Vec::new(),
            stats: Vec::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn stat(&self, name: &str) -> Option<&str> {
        self.stats.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn stat_f64(&self, name: &str) -> Option<f64> {
        self.stat(name).and_then(|s| s.parse().ok())
    }

    pub fn opnorm(&self, name: &str) -> Option<f64> {
        self.opnorms.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# tvls run manifest\n");
        out.push_str(&format!("experiment = {}\n", self.experiment));
        out.push_str(&format!("status = {}\n", self.status));
        out.push_str(&format!("noise_generator = {NOISE_GENERATOR}\n"));
        for (k, v) in &self.config {
            out.push_str(&format!("config.{k} = {v}\n"));
        }
        for (k, v) in &self.seeds {
            out.push_str(&format!("seed.{k} = {v}\n"));
        }
        for (k, v) in &self.opnorms {
            out.push_str(&format!("opnorm.{k} = {}\n", fmt_f64(*v)));
        }
        for f in &self.files {
            out.push_str(&format!("file.{} = sha256:{}\n", f.path, f.sha256));
        }
        for (k, v) in &self.stats {
            out.push_str(&format!("stat.{k} = {v}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut experiment = None;
        let mut m = RunManifest {
            experiment: Experiment::Deblur,
            status: String::new(),
            config: Vec::new(),
            seeds: Vec::new(),
            opnorms: Vec::new(),
            files: Vec::new(),
            stats: Vec::new(),
        };
        for (k, v, line) in parse_kv(text)? {
            let bad = |what: &str| Error::Config(format!("manifest line {line}: {what}"));
            if k == "experiment" {
                experiment = Some(v.parse::<Experiment>()?);
            } else if k == "status" {
                m.status = v;
            } else if k == "noise_generator" {
                if v != NOISE_GENERATOR {
                    return Err(bad(&format!("noise generator `{v}` is not `{NOISE_GENERATOR}`")));
                }
            } else if let Some(key) = k.strip_prefix("config.") {
                m.config.push((key.to_string(), v));
            } else if let Some(key) = k.strip_prefix("seed.") {
                m.seeds.push((key.to_string(), v.parse().map_err(|_| bad("bad seed"))?));
            } else if let Some(key) = k.strip_prefix("opnorm.") {
                m.opnorms.push((key.to_string(), v.parse().map_err(|_| bad("bad norm"))?));
            } else if let Some(path) = k.strip_prefix("file.") {
                let sha = v.strip_prefix("sha256:").ok_or_else(|| bad("file entries need sha256:"))?;
                m.files.push(ManifestFile {
                    path: path.to_string(),
                    sha256: sha.to_string(),
                });
            } else if let Some(key) = k.strip_prefix("stat.") {
                m.stats.push((key.to_string(), v));
            } else {
                return Err(bad(&format!("unknown key `{k}`")));
            }
        }
        m.experiment = experiment.ok_or_else(|| Error::Config("manifest has no `experiment`".into()))?;
        Ok(m)
    }

    /// The recorded configuration, optionally redirected to another output
    /// directory.
    pub fn replay_config(&self, output_dir: Option<&Path>) -> Result<ExperimentConfig> {
        let mut overrides = self.config.clone();
        if let Some(dir) = output_dir {
            overrides.retain(|(k, _)| k != "output_dir");
            overrides.push(("output_dir".into(), dir.to_string_lossy().into_owned()));
        }
        ExperimentConfig::load(self.experiment, "", &overrides)
    }

    /// Files whose digest differs from `other` or that only one side lists.
    pub fn file_mismatches(&self, other: &RunManifest) -> Vec<String> {
        let mut out = Vec::new();
        for f in &self.files {
            match other.files.iter().find(|g| g.path == f.path) {
                Some(g) if g.sha256 == f.sha256 => {}
                Some(_) => out.push(format!("{}: contents differ", f.path)),
                None => out.push(format!("{}: missing from the replay", f.path)),
            }
        }
        for g in &other.files {
            if !self.files.iter().any(|f| f.path == g.path) {
                out.push(format!("{}: not in the original run", g.path));
            }
        }
        out
    }
}

/// Writes run outputs below one directory and records them in a manifest.
pub struct OutputSink {
    dir: PathBuf,
    pub manifest: RunManifest,
    emit_plots: bool,
}

impl OutputSink {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let dir = cfg.output_dir()?;
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            manifest: RunManifest::new(cfg),
            emit_plots: cfg.emit_plots()?,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn emit_plots(&self) -> bool {
        self.emit_plots
    }

    pub fn write(&mut self, rel: &str, text: &str) -> Result<()> {
        if self.manifest.files.iter().any(|f| f.path == rel) {
            return Err(Error::InvalidParameter(format!("output `{rel}` written twice")));
        }
        write_text(&self.dir.join(rel), text)?;
        self.manifest.files.push(ManifestFile {
            path: rel.to_string(),
            sha256: sha256_hex(text.as_bytes()),
        });
        Ok(())
    }

    /// Writes under `plots/` when plot output is enabled.
    pub fn plot(&mut self, name: &str, text: &str) -> Result<()> {
        if self.emit_plots {
            self.write(&format!("plots/{name}"), text)?;
        }
        Ok(())
    }

    pub fn seed(&mut self, name: impl Into<String>, seed: u64) {
        self.manifest.seeds.push((name.into(), seed));
    }

    pub fn opnorm(&mut self, name: impl Into<String>, value: f64) {
        self.manifest.opnorms.push((name.into(), value));
    }

    pub fn stat(&mut self, name: impl Into<String>, value: impl ToString) {
        self.manifest.stats.push((name.into(), value.to_string()));
    }

    pub fn stat_f64(&mut self, name: impl Into<String>, value: f64) {
        self.stat(name, fmt_f64(value));
    }

    /// Writes `manifest.txt` with the given status and returns the manifest.
    pub fn finish(mut self, status: &str) -> Result<RunManifest> {
        self.manifest.status = status.to_string();
        write_text(&self.dir.join(MANIFEST_NAME), &self.manifest.to_text())?;
        Ok(self.manifest)
    }
}
