//! CSV and JSON rendering of result tables.
//!
//! Floats are written in the shortest form that round-trips, so parsing a
//! cell back yields the identical `f64`.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value as Json};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Value {
    fn to_cell(&self) -> String {
        match self {
            Value::Float(x) => format!("{x:?}"),
            Value::Int(i) => i.to_string(),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Value::Float(x) => Json::from(*x),
            Value::Int(i) => Json::from(*i),
            Value::Text(s) => Json::from(s.as_str()),
            Value::Bool(b) => Json::from(*b),
            Value::Empty => Json::Null,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(x.into())
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(x: Option<T>) -> Self {
        x.map_or(Value::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// Run-level diagnostics, placed in `meta.summary`.
    pub summary: Option<Json>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new(), summary: None }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn meta(config: &RunConfig) -> Json {
    json!({
        "program": "pspin",
        "version": env!("CARGO_PKG_VERSION"),
        "command": config.command.name(),
        "seed": config.seed,
        "config": config,
    })
}

pub fn render(table: &Table, config: &RunConfig) -> Result<Vec<u8>, CliError> {
    if table.rows.is_empty() {
        return Err(CliError::Numerical(pspin::Error::Inconsistent("no rows to emit".into())));
    }
    match config.format {
        Format::Csv => render_csv(table, config),
        Format::Json => {
            let mut m = meta(config);
            if let Some(s) = &table.summary {
                m["summary"] = s.clone();
            }
            let rows: Vec<Json> = table
                .rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Json> =
                        table.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.to_json())).collect();
                    Json::Object(obj)
                })
                .collect();
            let mut out =
                serde_json::to_vec_pretty(&json!({ "meta": m, "rows": rows })).expect("json values serialise");
            out.push(b'\n');
            Ok(out)
        }
    }
}

fn render_csv(table: &Table, config: &RunConfig) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    let cfg = serde_json::to_string(config).expect("config serialises");
    writeln!(out, "# pspin {} seed={} config={cfg}", env!("CARGO_PKG_VERSION"), config.seed).expect("write to vec");
    if let Some(s) = &table.summary {
        writeln!(out, "# summary={s}").expect("write to vec");
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::Io { path: "<csv buffer>".into(), message: e.to_string() };
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Value::to_cell)).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Io { path: "<csv buffer>".into(), message: e.to_string() })
}

/// Renders the table and writes it to `path`, or to standard output. A file
/// that could not be written completely is removed.
pub fn emit(table: &Table, config: &RunConfig, path: Option<&Path>) -> Result<(), CliError> {
    let bytes = render(table, config)?;
    match path {
        None => std::io::stdout().lock().write_all(&bytes).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
        Some(path) => std::fs::write(path, &bytes).map_err(|e| {
            let _ = std::fs::remove_file(path);
            CliError::io(path, e)
        }),
    }
}
