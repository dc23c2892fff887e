//! In-memory CSV tables, committed to disk only after an experiment finishes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// One table with `#` metadata lines, a header row and stringly rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub file_name: String,
    pub metadata: Vec<String>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(file_name: impl Into<String>, header: &[&'static str]) -> Self {
        Self {
            file_name: file_name.into(),
            metadata: Vec::new(),
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, line: impl Into<String>) -> &mut Self {
        self.metadata.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Pushes a row of floats in shortest round-trip decimal form.
    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| fmt_f64(*v)).collect());
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for m in &self.metadata {
            let _ = writeln!(s, "# {m}");
        }
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    /// Index of a header column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }
}

/// Locale-independent float rendering; `{}` on `f64` round-trips exactly.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // fold -0 into 0
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Result of one built-in consistency check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="`, `">="`, `"<"` or `">"`.
    pub relation: &'static str,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::with(name, value, "<=", threshold, value <= threshold)
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::with(name, value, ">=", threshold, value >= threshold)
    }

    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::with(name, value, ">", threshold, value > threshold)
    }

    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::with(name, value, "<", threshold, value < threshold)
    }

    fn with(
        name: impl Into<String>,
        value: f64,
        relation: &'static str,
        threshold: f64,
        passed: bool,
    ) -> Self {
        Self {
            name: name.into(),
            value,
            relation,
            threshold,
            passed,
        }
    }
}

/// Tables produced by a run.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct OutputSet {
    tables: Vec<CsvTable>,
}

impl OutputSet {
    pub fn add(&mut self, table: CsvTable) {
        self.tables.push(table);
    }

    pub fn tables(&self) -> &[CsvTable] {
        &self.tables
    }

    pub fn get(&self, file_name: &str) -> Option<&CsvTable> {
        self.tables.iter().find(|t| t.file_name == file_name)
    }

    /// Writes every table into `dir`. On failure, files written by this call
    /// are removed again.
    pub fn commit(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let path = dir.join(&t.file_name);
            if let Err(e) = fs::write(&path, t.render()) {
                written.push(path);
                remove_all(&written);
                return Err(e);
            }
            written.push(path);
        }
        Ok(written)
    }
}

pub(crate) fn remove_all(paths: &[PathBuf]) {
    for p in paths {
        let _ = fs::remove_file(p);
    }
}
