use adw_core::config::Config;
use adw_core::{AdwError, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Output directory of one command; remembers what it wrote.
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), started: Instant::now() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// CSV with a header row; floats use the shortest round-trip form.
    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(self.dir.join(name))
            .map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row.iter().map(|v| float(*v))).map_err(csv_err)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(self.dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn track(&mut self, name: String) {
        self.files.push(name);
    }

    /// Write `manifest.json` and consume the output.
    pub fn finish(mut self, command: &str, config: &Config) -> Result<()> {
        let canonical = config.canonical_json();
        let manifest = Manifest {
            command: command.to_string(),
            config_sha256: hex::encode(Sha256::digest(canonical.as_bytes())),
            config: serde_json::from_str(&canonical)?,
            versions: Versions {
                adw_cli: env!("CARGO_PKG_VERSION"),
                adw_core: adw_core::VERSION,
                parallel: cfg!(feature = "parallel"),
            },
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            files: std::mem::take(&mut self.files),
        };
        self.json("manifest.json", &manifest)
    }
}

/// Shortest round-trip digits; exponent form outside `[1e-4, 1e15)`.
pub fn float(v: f64) -> String {
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&v.abs()) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn csv_err(e: csv::Error) -> AdwError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AdwError::Io(io),
        other => AdwError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[derive(Serialize)]
struct Versions {
    adw_cli: &'static str,
    adw_core: &'static str,
    parallel: bool,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    config_sha256: String,
    config: serde_json::Value,
    versions: Versions,
    wall_time_seconds: f64,
    files: Vec<String>,
}
