//! Run manifests written next to every command's outputs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::{CliResult, GlobalArgs};

#[derive(Debug, Serialize)]
pub struct Timestamps {
    pub started_unix: f64,
    pub finished_unix: f64,
}

/// Everything needed to rerun a command and obtain the same bytes.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<Timestamps>,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

/// Collects outputs while a command runs and writes the manifest at the end.
pub struct Recorder {
    command: &'static str,
    config: serde_json::Value,
    seed: u64,
    started: Option<f64>,
    outputs: Vec<PathBuf>,
}

impl Recorder {
    pub fn start<C: Serialize>(command: &'static str, global: &GlobalArgs, config: &C) -> CliResult<Self> {
        Ok(Self {
            command,
            config: serde_json::to_value(config).map_err(bandvar::Error::from)?,
            seed: global.seed,
            started: global.timestamps.then(unix_now),
            outputs: Vec::new(),
        })
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Writes `<primary stem>.manifest.json` and returns its path.
    pub fn finish(self, primary: &Path) -> CliResult<PathBuf> {
        let path = sibling(primary, "manifest.json");
        let manifest = RunManifest {
            schema_version: bandvar::SCHEMA_VERSION,
            command: self.command.to_string(),
            config: self.config,
            seed: self.seed,
            version: bandvar::VERSION.to_string(),
            outputs: self.outputs,
            timestamps: self.started.map(|started_unix| Timestamps {
                started_unix,
                finished_unix: unix_now(),
            }),
        };
        bandvar::io::write_json(&manifest, &path)?;
        Ok(path)
    }
}

/// `dir/stem.suffix` for `dir/stem.ext`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.{suffix}"))
}
