//! Run manifests: every subcommand records its resolved settings next to
//! its outputs, enough to reproduce the run.

use satvid::{Error, Result};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Collects resolved settings for one run and serializes them as
/// line-oriented `key = value` text. Keys appear in insertion order, so
/// reruns produce byte-identical manifests except for `wall_time_s`.
pub struct RunManifest {
    subcommand: &'static str,
    entries: Vec<(String, String)>,
    started: Instant,
}

impl RunManifest {
    pub fn new(subcommand: &'static str) -> Self {
        RunManifest { subcommand, entries: Vec::new(), started: Instant::now() }
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_path(&mut self, key: &str, path: &Path) {
        self.entries.push((key.to_string(), path.display().to_string()));
    }

    /// Writes atomically: full content to a sibling temp file, then rename.
    /// A crashed run leaves either no manifest or a complete one.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        text.push_str(&format!("subcommand = {}\n", self.subcommand));
        text.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
        for (key, value) in &self.entries {
            text.push_str(&format!("{key} = {value}\n"));
        }
        text.push_str(&format!("wall_time_s = {:.3}\n", self.started.elapsed().as_secs_f64()));

        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

/// Manifest location for a run whose primary output is the file `out`:
/// a sibling named `<stem>.manifest.txt`.
pub fn manifest_beside_file(out: &Path) -> PathBuf {
    out.with_extension("manifest.txt")
}

/// Manifest location for a run whose output is the directory `out`.
pub fn manifest_in_dir(out: &Path) -> PathBuf {
    out.join("run_manifest.txt")
}
