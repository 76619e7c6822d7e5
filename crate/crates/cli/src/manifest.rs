use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub started_unix: f64,
    pub elapsed_seconds: f64,
}

/// Record of one command run: what it read, what it wrote, how it was
/// seeded and how long it took.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub format: &'static str,
    pub version: u32,
    pub command: String,
    pub arguments: Vec<String>,
    pub config_digest: Option<String>,
    pub inputs: Vec<FileDigest>,
    pub seed: Option<u64>,
    pub outputs: Vec<FileDigest>,
    pub timing: Timing,
    #[serde(skip)]
    clock: Option<Instant>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn start(command: &str) -> Self {
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0.0, |d| d.as_secs_f64());
        RunManifest {
            format: "sri-run-manifest",
            version: 1,
            command: command.to_string(),
            arguments: std::env::args().skip(1).collect(),
            config_digest: None,
            inputs: Vec::new(),
            seed: None,
            outputs: Vec::new(),
            timing: Timing {
                started_unix,
                elapsed_seconds: 0.0,
            },
            clock: Some(Instant::now()),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn config(&mut self, path: &Path) -> Result<()> {
        self.config_digest = Some(sha256_file(path)?);
        self.input(path)
    }

    pub fn output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    /// Writes the manifest, stamping the elapsed time.
    pub fn finish(mut self, path: &Path) -> Result<()> {
        if let Some(c) = self.clock {
            self.timing.elapsed_seconds = c.elapsed().as_secs_f64();
        }
        let text = serde_json::to_string_pretty(&self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        log::info!("manifest written to {}", path.display());
        Ok(())
    }
}

/// `<path>.manifest.json`
pub fn default_path(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
