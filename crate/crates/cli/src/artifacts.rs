//! Output directory handling. Every file carries the config hash and versions.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use robin_stokes::io::{write_csv, write_vtk, Metadata, PointData};
use robin_stokes::Mesh;

pub const FAILED_MARKER: &str = "FAILED";

pub struct Artifacts {
    pub dir: PathBuf,
    pub meta: Metadata,
}

impl Artifacts {
    pub fn new(dir: &Path, config_hash: &str, command: &str, seed: u64) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let meta = Metadata::new()
            .with("command", command)
            .with("config_sha256", config_hash)
            .with("seed", seed)
            .with("robin_stokes", robin_stokes::VERSION)
            .with("robin_stokes_cli", env!("CARGO_PKG_VERSION"));
        Ok(Artifacts { dir: dir.to_path_buf(), meta })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> robin_stokes::Result<PathBuf> {
        let p = self.path(name);
        write_csv(BufWriter::new(File::create(&p)?), &self.meta, header, rows)?;
        log::info!("wrote {}", p.display());
        Ok(p)
    }

    pub fn vtk(&self, name: &str, mesh: &Mesh, data: &[PointData]) -> robin_stokes::Result<PathBuf> {
        let p = self.path(name);
        let title = format!("robin-stokes {} config {}", self.meta.get("command").unwrap_or(""), self.meta.get("config_sha256").unwrap_or(""));
        let mut w = BufWriter::new(File::create(&p)?);
        write_vtk(&mut w, mesh, &title, data)?;
        w.flush()?;
        log::info!("wrote {}", p.display());
        Ok(p)
    }

    /// JSON object with a `metadata` member added.
    pub fn json(&self, name: &str, mut body: serde_json::Map<String, serde_json::Value>) -> std::io::Result<PathBuf> {
        let meta: serde_json::Map<_, _> = self.meta.entries.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
        body.insert("metadata".into(), serde_json::Value::Object(meta));
        let p = self.path(name);
        let mut text = serde_json::to_string_pretty(&body).expect("json serializes");
        text.push('\n');
        fs::write(&p, text)?;
        log::info!("wrote {}", p.display());
        Ok(p)
    }

    pub fn clear_marker(&self) -> std::io::Result<()> {
        match fs::remove_file(self.path(FAILED_MARKER)) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e),
            _ => Ok(()),
        }
    }

    pub fn mark_failed(&self, stage: &str, message: &str) {
        let text = format!("stage: {stage}\nerror: {message}\n");
        if let Err(e) = fs::write(self.path(FAILED_MARKER), text) {
            log::error!("could not write failure marker: {e}");
        }
    }
}
