//! Map export and run manifests.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::exec::Exec;
use crate::geometry::GridKind;
use crate::map_io::write_map;
use crate::{Error, Result};

use super::config::SimConfig;
use super::trial::TrialSetup;

/// Writes every map of one trial into `dir`: `benchmark.txt`,
/// `local-<u>.txt` per UAV, `mure.txt` and `mimore.txt`, whichever the
/// configured methods produce.
pub fn export_maps(
    cfg: &SimConfig,
    kind: GridKind,
    trial: usize,
    dir: &Path,
    exec: Exec,
) -> Result<Vec<PathBuf>> {
    let setup = TrialSetup::new(cfg, kind, exec)?;
    let maps = setup.maps(trial, exec)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |map: &crate::estimation::RcsMap| -> Result<()> {
        let path = dir.join(format!("{}.txt", map.provenance.label()));
        write_map(&path, map, &setup.grid)?;
        written.push(path);
        Ok(())
    };
    if let Some(m) = &maps.benchmark {
        put(m)?;
    }
    for m in &maps.locals {
        put(m)?;
    }
    if let Some(m) = &maps.mure {
        put(m)?;
    }
    if let Some(m) = &maps.mimore {
        put(m)?;
    }
    Ok(written)
}

/// Record of a run, written next to its outputs whether or not it succeeded.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub config_sha256: Option<String>,
    pub seed: Option<u64>,
    pub parallel: bool,
    pub workers: usize,
    pub status: String,
    pub error: Option<String>,
    pub outputs: Vec<String>,
    pub config: Option<String>,
}

impl RunManifest {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            tool: "uavsense".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            config_sha256: None,
            seed: None,
            parallel: Exec::parallel_available(),
            workers: 0,
            status: "running".into(),
            error: None,
            outputs: Vec::new(),
            config: None,
        }
    }

    pub fn with_config(&mut self, cfg: &SimConfig) {
        self.config_sha256 = Some(cfg.hash());
        self.seed = Some(cfg.run.seed);
        self.workers = cfg.run.workers;
        self.config = Some(cfg.to_toml());
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
