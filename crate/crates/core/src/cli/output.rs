//! Output files: tables as CSV, JSON or gnuplot columns, JSON documents and
//! the run manifest. Every float is written as `%.12e`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    GnuplotDat,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::GnuplotDat => "dat",
        }
    }
}

/// C-style `%.12e`: `-1.250000000000e-03`.
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_e(*v),
            Cell::Text(t) => t.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => float_value(*v),
            Cell::Text(t) => Value::from(t.as_str()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::render).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            Format::GnuplotDat => {
                out.push_str("# ");
                out.push_str(&self.columns.join(" "));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::render).collect();
                    out.push_str(&cells.join(" "));
                    out.push('\n');
                }
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut m = Map::new();
                        for (c, v) in self.columns.iter().zip(row) {
                            m.insert((*c).to_string(), v.json());
                        }
                        Value::Object(m)
                    })
                    .collect();
                out = render_json(&Value::Array(rows));
            }
        }
        out
    }
}

/// A JSON number printed as `%.12e` (non-finite values become strings).
pub fn float_value(x: f64) -> Value {
    if !x.is_finite() {
        return Value::from(fmt_e(x));
    }
    Value::Number(Number::from_str(&fmt_e(x)).expect("valid JSON number"))
}

/// Rewrites every non-integer number in `v` as `%.12e`.
pub fn normalize_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => float_value(n.as_f64().expect("f64")),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize_floats).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, normalize_floats(v))).collect()),
        other => other,
    }
}

pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&normalize_floats(v.clone())).expect("serializable");
    s.push('\n');
    s
}

/// Files written during a run, in order.
#[derive(Debug, Default)]
pub struct Written {
    pub files: Vec<(PathBuf, String)>,
}

impl Written {
    pub fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(name);
        if self.files.iter().any(|(p, _)| p == &path) {
            return Err(Error::Io(format!("{} would be written twice", path.display())));
        }
        fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.files.push((path, hex_digest(contents.as_bytes())));
        Ok(())
    }

    pub fn table(&mut self, dir: &Path, stem: &str, table: &Table, format: Format) -> Result<()> {
        self.write(dir, &format!("{stem}.{}", format.extension()), &table.render(format))
    }

    pub fn json(&mut self, dir: &Path, name: &str, value: &Value) -> Result<()> {
        self.write(dir, name, &render_json(value))
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}
