//! Tables and their CSV / JSON-lines encodings.
//!
//! Floats are written in Rust's shortest round-trip form, so parsing an
//! emitted value gives back the identical `f64`.

use std::fmt;
use std::io::{self, Write};

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u128),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // Debug is the shortest round-trip form, with exponents.
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_u128(*v),
            // JSON has no infinities.
            Cell::Float(v) if !v.is_finite() => s.serialize_str(&format!("{v:?}")),
            Cell::Float(v) => s.serialize_f64(*v),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Empty => s.serialize_none(),
        }
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u128)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

/// What produced a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Meta {
    pub command: String,
    /// SHA-256 of the config text; empty when no config was read.
    pub config_hash: String,
    pub seed: u64,
}

impl Meta {
    fn comment(&self) -> String {
        let hash = if self.config_hash.is_empty() {
            "none"
        } else {
            &self.config_hash[..16.min(self.config_hash.len())]
        };
        format!(
            "# semicap {} config-sha256={} seed={}",
            self.command, hash, self.seed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, meta: &Meta, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(meta, out),
            Format::Jsonl => self.write_jsonl(meta, out),
        }
    }

    pub fn write_csv(&self, meta: &Meta, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "{}", meta.comment())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(ToString::to_string))?;
        }
        w.flush()
    }

    pub fn write_jsonl(&self, meta: &Meta, out: &mut dyn Write) -> io::Result<()> {
        let header = serde_json::json!({
            "_meta": {
                "command": meta.command,
                "config_sha256": meta.config_hash,
                "seed": meta.seed,
                "columns": self.columns,
            }
        });
        writeln!(out, "{header}")?;
        for row in &self.rows {
            let line = serde_json::to_string(&JsonRow {
                columns: &self.columns,
                row,
            })?;
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

struct JsonRow<'a> {
    columns: &'a [String],
    row: &'a [Cell],
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (c, v) in self.columns.iter().zip(self.row) {
            map.serialize_entry(c, v)?;
        }
        map.end()
    }
}

/// Parsed CSV output: header names and raw string records.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub comment: String,
    pub columns: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        self.records.iter().map(|r| r[i].parse().ok()).collect()
    }
}

pub fn read_csv(text: &str) -> Result<ParsedCsv, csv::Error> {
    let comment = text
        .lines()
        .next()
        .filter(|l| l.starts_with('#'))
        .unwrap_or("")
        .to_owned();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let columns = r.headers()?.iter().map(str::to_owned).collect();
    let records = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_owned).collect()))
        .collect::<Result<_, _>>()?;
    Ok(ParsedCsv {
        comment,
        columns,
        records,
    })
}
