use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, SCHEMA};

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Result of a command in both output shapes.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub table: Table,
}

/// 17 significant digits; infinities and NaN as `inf`, `-inf`, `nan`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Compact JSON with every float printed at 17 significant digits.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("JSON serialization to memory");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn config_value(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).expect("config serializes")
}

/// `{"schema", "config"?, "result"?, "error"?}` on one line.
pub fn json_document(cfg: Option<&RunConfig>, result: Option<Value>, error: Option<Value>) -> String {
    let mut doc = json!({ "schema": SCHEMA });
    if let Some(cfg) = cfg {
        doc["config"] = config_value(cfg);
    }
    if let Some(v) = result {
        doc["result"] = v;
    }
    if let Some(v) = error {
        doc["error"] = v;
    }
    to_json_line(&doc) + "\n"
}

pub fn csv_document(cfg: &RunConfig, table: &Table) -> String {
    let mut out = format!(
        "# heis-tube schema {SCHEMA} config {}\n",
        to_json_line(&config_value(cfg))
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).expect("CSV to memory");
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render)).expect("CSV to memory");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("CSV flush")).expect("CSV is UTF-8"));
    out
}

/// Column names `x1, y1, …, xn, yn, t` with a prefix.
pub fn coord_columns(prefix: &str, n: usize, with_t: bool) -> Vec<String> {
    let mut cols = Vec::with_capacity(2 * n + 1);
    for i in 1..=n {
        cols.push(format!("{prefix}x{i}"));
        cols.push(format!("{prefix}y{i}"));
    }
    if with_t {
        cols.push(format!("{prefix}t"));
    }
    cols
}

pub fn nums(values: &[f64]) -> Vec<Cell> {
    values.iter().map(|v| Cell::Num(*v)).collect()
}
