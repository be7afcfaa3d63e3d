pub mod basis_check;
pub mod blob;
pub mod deform;
pub mod render;
pub mod simulate;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use qdiff_core::{build_eigenbasis, build_spin_basis, LaplacianEigenbasis, SpinBasis};

use crate::args::OutputArgs;
use crate::error::{CliError, CliResult};
use crate::formats;
use crate::render::{write_raster, Rendered};

pub const MAX_N: i64 = 256;

/// Output directory plus the list of files written so far.
pub struct Session {
    dir: PathBuf,
    outputs: Vec<String>,
    summary: Map<String, Value>,
}

impl Session {
    pub fn open(output: &OutputArgs) -> CliResult<Self> {
        fs::create_dir_all(&output.out).map_err(|e| CliError::io(&output.out, e))?;
        Ok(Session { dir: output.out.clone(), outputs: Vec::new(), summary: Map::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        formats::write(&path, bytes)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Serializes `rows` as CSV with a header from the row type.
    pub fn write_csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::runtime("io", e.to_string()))?;
        self.write(name, &bytes)
    }

    pub fn write_raster(&mut self, stem: &str, r: &Rendered) -> CliResult<()> {
        let names = write_raster(&self.dir, stem, r)?;
        self.outputs.extend(names);
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) -> CliResult<()> {
        self.summary.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Writes `manifest.json`; contains no timestamps so reruns are bit-identical.
    pub fn finish<C: Serialize>(mut self, command: &str, config: &C, status: &str) -> CliResult<PathBuf> {
        self.outputs.push("manifest.json".into());
        let manifest = serde_json::json!({
            "format": "qdiff-manifest-v1",
            "tool": "qdiff",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "status": status,
            "config": config,
            "outputs": self.outputs,
            "summary": self.summary,
        });
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        formats::write(&path, text.as_bytes())?;
        Ok(path)
    }
}

/// Prints a line to stdout, ignoring a closed pipe.
pub fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
}

pub fn check_n(n: i64) -> CliResult<usize> {
    if !(2..=MAX_N).contains(&n) {
        return Err(CliError::usage(format!("--n must be in 2..={MAX_N}, got {n}")));
    }
    Ok(n as usize)
}

pub fn check_time(name: &str, t: f64) -> CliResult<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(CliError::usage(format!("{name} must be finite and non-negative, got {t}")));
    }
    Ok(t)
}

pub fn check_step(name: &str, h: f64) -> CliResult<f64> {
    if !h.is_finite() || h <= 0.0 {
        return Err(CliError::usage(format!("{name} must be finite and positive, got {h}")));
    }
    Ok(h)
}

pub fn check_width(width: usize) -> CliResult<usize> {
    if width < 16 {
        return Err(CliError::usage(format!("--width must be at least 16, got {width}")));
    }
    Ok(width)
}

/// Spin basis and eigenbasis for `n`, through the cache file when given.
pub fn eigenbasis(n: usize, cache: Option<&Path>) -> CliResult<(SpinBasis, LaplacianEigenbasis)> {
    let basis = build_spin_basis(n)?;
    let Some(path) = cache else {
        let eig = build_eigenbasis(&basis)?;
        return Ok((basis, eig));
    };
    if path.exists() {
        let c = formats::read(path)?;
        let eig = formats::decode_eigenbasis(&c, &basis)
            .map_err(|e| CliError::runtime(&e.code, format!("{}: {}", path.display(), e.message)))?;
        return Ok((basis, eig));
    }
    let eig = build_eigenbasis(&basis)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    formats::write(path, &formats::encode_eigenbasis(&eig))?;
    Ok((basis, eig))
}
