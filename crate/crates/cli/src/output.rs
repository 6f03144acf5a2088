use std::io::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
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
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

/// 17 significant digits, enough to recover every binary64 value.
pub fn format_float(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v).unwrap_or_default(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Float(v) => match format_float(*v) {
                Some(text) => RawValue::from_string(text)
                    .map_err(serde::ser::Error::custom)?
                    .serialize(s),
                None => s.serialize_none(),
            },
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Null => s.serialize_none(),
        }
    }
}

/// One flat output row; column order is insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(Vec<(String, Cell)>);

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Cell>) -> Self {
        self.0.push((key.into(), value.into()));
        self
    }

    pub fn extend(mut self, other: Record) -> Self {
        self.0.extend(other.0);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Columns `x1..xk`, or a single `x`.
    pub fn with_counts(mut self, xs: &[usize]) -> Self {
        if let [x] = xs {
            return self.with("x", *x);
        }
        for (j, &x) in xs.iter().enumerate() {
            self.0.push((format!("x{}", j + 1), Cell::from(x)));
        }
        self
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

pub struct Output {
    pub config: serde_json::Value,
    pub records: Vec<Record>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a serde_json::Value,
    records: &'a [Record],
    warnings: &'a [String],
}

pub fn write_json<W: Write>(w: &mut W, command: &str, out: &Output) -> std::io::Result<()> {
    let env = Envelope {
        tool: env!("CARGO_BIN_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: &out.config,
        records: &out.records,
        warnings: &out.warnings,
    };
    serde_json::to_writer_pretty(&mut *w, &env)?;
    writeln!(w)
}

pub fn write_csv<W: Write>(w: W, out: &Output) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    if let Some(first) = out.records.first() {
        wtr.write_record(first.0.iter().map(|(k, _)| k.as_str()))?;
    }
    for r in &out.records {
        wtr.write_record(r.0.iter().map(|(_, v)| v.text()))?;
    }
    wtr.flush()?;
    Ok(())
}
