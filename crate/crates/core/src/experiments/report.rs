//! Tables and their CSV/Markdown rendering.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::Format;
use crate::error::{PodError, Result};
use crate::numfmt::{fmt_e4, fmt_g17};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Real(f64),
}

impl Cell {
    /// Table rendering.
    pub fn short(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => fmt_e4(*x),
        }
    }

    /// Sidecar rendering, round-trips `f64`.
    pub fn full(&self) -> String {
        match self {
            Cell::Real(x) => fmt_g17(*x),
            other => other.short(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Real(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "pass" } else { "fail" }.into())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableReport {
    pub label: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// TOML snapshot of the configuration that produced the table.
    pub provenance: String,
}

impl TableReport {
    pub fn new(label: impl Into<String>, headers: &[&str], provenance: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            provenance: provenance.into(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.headers.len() {
            return Err(PodError::DimensionMismatch {
                expected: self.headers.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    /// Numeric values of column `name`.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        self.rows.iter().map(|r| r[j].as_f64()).collect()
    }

    pub fn cell(&self, row: usize, name: &str) -> Option<&Cell> {
        self.rows.get(row)?.get(self.column_index(name)?)
    }
}

fn write_csv<W: Write>(report: &TableReport, out: W, full: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&report.headers)?;
    for row in &report.rows {
        w.write_record(row.iter().map(|c| if full { c.full() } else { c.short() }))?;
    }
    w.flush()?;
    Ok(())
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

/// Renders one table.
pub fn emit<W: Write>(report: &TableReport, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(report, out, false),
        Format::Markdown => {
            let line = |cells: Vec<String>| format!("| {} |\n", cells.join(" | "));
            let mut s = line(report.headers.iter().map(|h| md_escape(h)).collect());
            s += &line(report.headers.iter().map(|_| "---".to_string()).collect());
            for row in &report.rows {
                s += &line(row.iter().map(|c| md_escape(&c.short())).collect());
            }
            out.write_all(s.as_bytes())?;
            Ok(())
        }
    }
}

/// Full-precision (`%.17g`) CSV.
pub fn emit_full_csv<W: Write>(report: &TableReport, out: W) -> Result<()> {
    write_csv(report, out, true)
}

/// Renders several tables into one stream, each preceded by a `# label` line.
pub fn emit_all<W: Write>(reports: &[TableReport], format: Format, mut out: W) -> Result<()> {
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        match format {
            Format::Csv => writeln!(out, "# {}", r.label)?,
            Format::Markdown => writeln!(out, "### {}\n", r.label)?,
        }
        emit(r, format, &mut out)?;
    }
    Ok(())
}

/// Writes `<label>.<ext>`, `<label>.full.csv` and `<label>.provenance.toml` per table into `dir`.
pub fn write_reports(reports: &[TableReport], dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for r in reports {
        let main = dir.join(format!("{}.{}", r.label, format.extension()));
        emit(r, format, std::fs::File::create(&main)?)?;
        let full = dir.join(format!("{}.full.csv", r.label));
        emit_full_csv(r, std::fs::File::create(&full)?)?;
        let prov = dir.join(format!("{}.provenance.toml", r.label));
        std::fs::write(&prov, &r.provenance)?;
        written.extend([main, full, prov]);
    }
    Ok(written)
}
