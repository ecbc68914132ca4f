//! CSV/JSON writers and the metadata block shared by every result file.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{RunConfig, Tolerances};

pub const GIT_REVISION: &str = env!("WIREPHASE_GIT_REV");

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub git_revision: &'static str,
    pub command: String,
    pub scenario: String,
    pub grid: usize,
    pub loop_points: usize,
    pub epsilon: f64,
    pub tolerances: Tolerances,
    pub units: &'static str,
}

impl Metadata {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Self {
            tool: "wirephase",
            version: env!("CARGO_PKG_VERSION"),
            git_revision: GIT_REVISION,
            command: command.into(),
            scenario: cfg.scenario.clone(),
            grid: cfg.grid,
            loop_points: cfg.holonomy.points,
            epsilon: cfg.holonomy.epsilon,
            tolerances: cfg.tolerances,
            units: "hbar = m = 1, reference radius 1",
        }
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Accumulates a CSV table with a fixed header.
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { columns: header.len(), text: format!("{}\n", header.join(",")) }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> io::Result<Self> {
        fs::create_dir_all(path)?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn path(&self) -> &Path {
        &self.0
    }

    pub fn write_csv(&self, name: &str, csv: &Csv) -> io::Result<PathBuf> {
        let p = self.0.join(name);
        fs::write(&p, csv.as_str())?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> io::Result<PathBuf> {
        let p = self.0.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&p, text)?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, -0.125, 1.0 / 3.0, 1e-300, -2.5e-7, 6.02e23, std::f64::consts::PI] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(num(0.375), "0.375");
        assert_eq!(num(1.5e-7), "1.5e-7");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&[num(1.0), num(-0.5)]);
        assert_eq!(c.as_str(), "a,b\n1,-0.5\n");
    }
}
