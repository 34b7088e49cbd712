//! Payload files and the run manifest.
//!
//! Payloads (CSV tables and JSON summaries) depend only on the resolved
//! parameters and the seed, so a replay reproduces them byte for byte. Wall
//! clock data lives in the separate `*.manifest.json`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{LabError, Result};

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Reals in scientific notation with 17 significant digits.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // "NaN", "inf", "-inf"
        format!("{v}")
    }
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Real(v) => format_real(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

/// CSV text with a single header row.
pub fn render_csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(format_cell).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Writes payloads named `<stem>.<suffix>` into one directory.
pub struct OutputSet {
    dir: PathBuf,
    stem: String,
    files: Vec<String>,
    started: SystemTime,
    clock: Instant,
}

impl OutputSet {
    pub fn new(dir: &Path, stem: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .map_err(|e| LabError::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            stem: stem.to_string(),
            files: Vec::new(),
            started: SystemTime::now(),
            clock: Instant::now(),
        })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}.{suffix}", self.stem))
    }

    fn write(&mut self, suffix: &str, text: &str) -> Result<()> {
        let path = self.path(suffix);
        std::fs::write(&path, text)?;
        self.files.push(path.file_name().unwrap().to_string_lossy().into_owned());
        Ok(())
    }

    pub fn csv(&mut self, suffix: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
        self.write(suffix, &render_csv(header, rows))
    }

    pub fn json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Numerical(e.to_string()))?;
        text.push('\n');
        self.write(suffix, &text)
    }

    /// Writes `<stem>.manifest.json`: the command, the fully resolved
    /// configuration, the payload list and the timestamps.
    pub fn finish(mut self, command: &str, config: Value, exit_code: i32) -> Result<PathBuf> {
        let unix = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "payloads": self.files,
            "exit_code": exit_code,
            "timestamps": {
                "started_unix": unix(self.started),
                "elapsed_seconds": self.clock.elapsed().as_secs_f64(),
            },
        });
        let path = self.path("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| LabError::Numerical(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text)?;
        self.files.clear();
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_format_has_17_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(-2.0), "-2.0000000000000000e0");
        // round trip is exact
        let x = std::f64::consts::PI / 7.0;
        assert_eq!(format_real(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_layout() {
        let text = render_csv(&["a", "b", "c"], &[vec![1usize.into(), 0.5.into(), "x,y".into()]]);
        assert_eq!(text, "a,b,c\n1,5.0000000000000000e-1,\"x,y\"\n");
    }
}
