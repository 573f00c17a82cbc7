//! Row-oriented output in CSV, JSON array or NDJSON form.

use std::io::{self, Write};

use serde::ser::{Serialize, SerializeMap, Serializer};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Str(String),
    Bool(bool),
    Null,
}

impl Value {
    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Value::Null, Value::Num)
    }

    fn csv(&self) -> String {
        match self {
            Value::Num(x) if x.is_nan() => "NaN".into(),
            Value::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Value::Num(x) => format!("{x:.16e}"),
            Value::Str(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Null => "NaN".into(),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Num(x) if x.is_finite() => s.serialize_f64(*x),
            Value::Num(_) => s.serialize_none(),
            Value::Str(v) => s.serialize_str(v),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Null => s.serialize_none(),
        }
    }
}

/// Fixed column set with rows in output order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

struct Record<'a> {
    columns: &'a [String],
    row: &'a [Value],
}

impl Serialize for Record<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (k, v) in self.columns.iter().zip(self.row) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Provenance lines written above CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub command_line: String,
    pub timestamp: u64,
}

pub const UNITS: &str =
    "all quantities dimensionless; energies and temperatures in units of hbar*Omega0, frequencies in Omega0";

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: &mut impl Write, header: Option<&Header>) -> io::Result<()> {
        if let Some(h) = header {
            writeln!(out, "# gaussmode {}", env!("CARGO_PKG_VERSION"))?;
            writeln!(out, "# command: {}", h.command_line)?;
            writeln!(out, "# generated: {} (unix seconds)", h.timestamp)?;
            writeln!(out, "# units: {UNITS}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json(&self, out: &mut impl Write, ndjson: bool, single: bool) -> io::Result<()> {
        let records = self.rows.iter().map(|row| Record { columns: &self.columns, row });
        if ndjson {
            for r in records {
                serde_json::to_writer(&mut *out, &r)?;
                writeln!(out)?;
            }
        } else if single && self.rows.len() == 1 {
            serde_json::to_writer_pretty(&mut *out, &Record { columns: &self.columns, row: &self.rows[0] })?;
            writeln!(out)?;
        } else {
            serde_json::to_writer_pretty(&mut *out, &records.collect::<Vec<_>>())?;
            writeln!(out)?;
        }
        Ok(())
    }
}
