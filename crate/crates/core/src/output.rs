//! Deterministic CSV emission. Every file opens with `#` metadata lines
//! carrying the tool version and the resolved scenario.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::config::ScenarioConfig;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Nine significant digits.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        format!("{v}")
    }
}

/// A table of numbers with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Extra `#` lines emitted before the config dump.
    pub notes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            notes: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self, cfg: &ScenarioConfig) -> String {
        let mut out = metadata_header(cfg, &self.notes);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn metadata_header(cfg: &ScenarioConfig, notes: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {TOOL_NAME} {TOOL_VERSION}");
    for n in notes {
        let _ = writeln!(out, "# {n}");
    }
    let _ = writeln!(out, "# resolved config:");
    for line in cfg.to_toml_string().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "#   {line}");
        }
    }
    out
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}
