//! Self-describing CSV/JSON tables. Each file starts with the resolved run
//! configuration; floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Float(v.unwrap_or(f64::NAN))
    }
}

/// 17 significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub summary: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, config: Vec<(String, String)>, columns: &[&str]) -> Self {
        Table {
            command: command.to_string(),
            config,
            summary: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn note_float(&mut self, key: &str, value: f64) {
        self.note(key, format_float(value));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# levelflow {}", self.command).unwrap();
        for (k, v) in &self.config {
            writeln!(out, "# config.{k} = {v}").unwrap();
        }
        for (k, v) in &self.summary {
            writeln!(out, "# summary.{k} = {v}").unwrap();
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Float(f) => format_float(*f),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        let map = |pairs: &[(String, String)]| {
            let obj: serde_json::Map<String, serde_json::Value> = pairs
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect();
            serde_json::to_string(&serde_json::Value::Object(obj)).expect("string map serializes")
        };
        let mut out = String::new();
        writeln!(out, "{{").unwrap();
        writeln!(out, "  \"command\": {},", serde_json::to_string(&self.command).unwrap()).unwrap();
        writeln!(out, "  \"config\": {},", map(&self.config)).unwrap();
        writeln!(out, "  \"summary\": {},", map(&self.summary)).unwrap();
        writeln!(out, "  \"columns\": {},", serde_json::to_string(&self.columns).unwrap()).unwrap();
        writeln!(out, "  \"rows\": [").unwrap();
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Float(f) if f.is_finite() => format_float(*f),
                    Cell::Float(_) => "null".to_string(),
                    Cell::Text(s) => serde_json::to_string(s).unwrap(),
                })
                .collect();
            let sep = if i + 1 < self.rows.len() { "," } else { "" };
            writeln!(out, "    [{}]{sep}", cells.join(", ")).unwrap();
        }
        writeln!(out, "  ]").unwrap();
        writeln!(out, "}}").unwrap();
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes `<dir>/<stem>.<ext>` and returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{stem}.{}", format.extension()));
        std::fs::write(&path, self.render(format)).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}
