//! Output directory bookkeeping and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use biphoton_core::{Error, Evaluator, PhysicalParams, Result, SpectralGridSpec};
use serde::Serialize;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<PhysicalParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<SpectralGridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluator: Option<Evaluator>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_seconds: Option<f64>,
}

/// Collects the files a command writes; the manifest goes last.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
    started: Instant,
    reproducible: bool,
}

impl OutputDir {
    pub fn create(root: &Path, reproducible: bool) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| {
            Error::Format(format!("cannot create output directory {}: {e}", root.display()))
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
            started: Instant::now(),
            reproducible,
        })
    }

    /// Write `name` through `fill` and flush it to disk.
    pub fn write<F>(&mut self, name: &str, fill: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut BufWriter<&File>) -> Result<()>,
    {
        let path = self.root.join(name);
        let file = File::create(&path)?;
        {
            let mut w = BufWriter::new(&file);
            fill(&mut w)?;
            w.flush()?;
        }
        file.sync_all()?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        self.write(name, |w| Ok(w.write_all(text.as_bytes())?))
    }

    /// SVG comment line naming the generation time, or nothing when
    /// reproducible output was requested.
    pub fn stamp(&self) -> Option<String> {
        if self.reproducible {
            return None;
        }
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Some(format!("generated at unix time {secs}"))
    }

    /// Write the manifest via a temporary file so it appears atomically.
    pub fn finish(
        self,
        params: Option<PhysicalParams>,
        grid: Option<SpectralGridSpec>,
        evaluator: Option<Evaluator>,
    ) -> Result<PathBuf> {
        let manifest = RunManifest {
            tool: "biphoton",
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().skip(1).collect(),
            params,
            grid,
            evaluator,
            outputs: self.written.clone(),
            duration_seconds: (!self.reproducible).then(|| self.started.elapsed().as_secs_f64()),
        };
        let tmp = self.root.join(".manifest.json.tmp");
        {
            let file = File::create(&tmp)?;
            let mut w = BufWriter::new(&file);
            serde_json::to_writer_pretty(&mut w, &manifest)?;
            w.write_all(b"\n")?;
            w.flush()?;
            drop(w);
            file.sync_all()?;
        }
        let path = self.root.join(MANIFEST);
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}
