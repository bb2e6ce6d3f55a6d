//! Reading joint distributions and writing tabular reports.
//!
//! Input is JSON (`{"x_alphabet", "y_alphabet", "pmf", "x_values"?,
//! "y_values"?}`) or CSV, chosen by file extension. In CSV the header row
//! holds the Y labels (its first cell is ignored), the first column holds the
//! X labels, and the remaining cells are probabilities. Numeric values for
//! the symbols can be side-loaded from separate CSV files with one value per
//! cell, in alphabet order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::dist::{validate, JointDistribution, RawJoint};
use crate::error::{Error, Result};

/// Parses a joint pmf from CSV text.
pub fn parse_joint_csv(text: &str) -> Result<RawJoint> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(Error::Parse { line: 1, column: 1, message: "empty file".into() }),
    };
    let y_alphabet: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if y_alphabet.is_empty() {
        return Err(Error::Parse { line: 1, column: 2, message: "header has no Y labels".into() });
    }
    let mut x_alphabet = Vec::new();
    let mut pmf = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != y_alphabet.len() + 1 {
            return Err(Error::Parse {
                line,
                column: rec.len().min(y_alphabet.len() + 1) + 1,
                message: format!("expected {} cells, found {}", y_alphabet.len() + 1, rec.len()),
            });
        }
        x_alphabet.push(rec[0].to_string());
        let row = rec
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, cell)| parse_number(cell, line, j + 1))
            .collect::<Result<Vec<f64>>>()?;
        pmf.push(row);
    }
    Ok(RawJoint { x_alphabet, y_alphabet, pmf, x_values: None, y_values: None })
}

/// Parses a list of numbers from CSV text: every non-empty cell, row by row.
pub fn parse_values_csv(text: &str) -> Result<Vec<f64>> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        for (j, cell) in rec.iter().enumerate() {
            if !cell.is_empty() {
                out.push(parse_number(cell, line, j + 1)?);
            }
        }
    }
    Ok(out)
}

pub fn parse_joint_json(text: &str) -> Result<RawJoint> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), column: e.column(), message: e.to_string() })
}

fn parse_number(cell: &str, line: usize, column: usize) -> Result<f64> {
    cell.parse::<f64>().map_err(|_| Error::Parse { line, column, message: format!("'{cell}' is not a number") })
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, column: 0, message: e.to_string() }
}

/// Loads and validates a joint pmf, attaching side-loaded values if given.
pub fn read_joint(path: &Path, x_values: Option<&Path>, y_values: Option<&Path>) -> Result<JointDistribution> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let mut raw = if is_json { parse_joint_json(&text)? } else { parse_joint_csv(&text)? };
    let load = |p: &Path| -> Result<Vec<f64>> {
        let t = fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        parse_values_csv(&t)
    };
    if let Some(p) = x_values {
        raw.x_values = Some(load(p)?);
    }
    if let Some(p) = y_values {
        raw.y_values = Some(load(p)?);
    }
    validate(raw)
}

/// Writes `dist` as CSV in the input layout.
pub fn joint_to_csv(dist: &JointDistribution) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(dist.y_alphabet().iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (x, label) in dist.x_alphabet().iter().enumerate() {
        let mut rec = vec![label.clone()];
        rec.extend(dist.row(x).iter().map(f64::to_string));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv output is utf-8")
}

/// One report cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => {
                serde_json::Number::from_f64(*v).map_or_else(|| Value::String(v.to_string()), Value::Number)
            }
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// A named table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Renders tables. CSV output places tables one after another, separated
/// by a blank line; JSON output is an object keyed by table name.
pub fn render(tables: &[Table], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::new();
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&t.header).expect("in-memory write");
                for r in &t.rows {
                    w.write_record(r.iter().map(Cell::to_csv)).expect("in-memory write");
                }
                out.push_str(&String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8"));
            }
            out
        }
        Format::Json => {
            let mut root = Map::new();
            for t in tables {
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: Map<String, Value> =
                            t.header.iter().cloned().zip(r.iter().map(Cell::to_json)).collect();
                        Value::Object(obj)
                    })
                    .collect();
                root.insert(t.name.clone(), Value::Array(rows));
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("finite json");
            s.push('\n');
            s
        }
    }
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}
