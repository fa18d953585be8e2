//! Flat tables and their CSV/JSON encodings.
//!
//! CSV: one header row, `\n` line endings, numbers in their shortest
//! round-trip form, switching to scientific notation once the decimal
//! exponent reaches ±6. Non-finite values are written `inf`, `-inf`, `nan`;
//! missing values as an empty field.
//!
//! JSON: `{"schema_version": 1, "command", "config", "columns", "rows"}` with
//! rows as arrays; non-finite numbers become the same strings as in CSV.

use std::fmt;

use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => Value::String(format_number(*x)),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }

    fn from_json(v: &Value) -> Cell {
        match v {
            Value::Null => Cell::Empty,
            Value::Number(n) => match n.as_i64() {
                Some(i) if !n.is_f64() => Cell::Int(i),
                _ => Cell::Num(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::String(s) => match s.as_str() {
                "inf" => Cell::Num(f64::INFINITY),
                "-inf" => Cell::Num(f64::NEG_INFINITY),
                "nan" => Cell::Num(f64::NAN),
                _ => Cell::Text(s.clone()),
            },
            other => Cell::Text(other.to_string()),
        }
    }

    fn from_field(s: &str) -> Cell {
        if s.is_empty() {
            return Cell::Empty;
        }
        if let Ok(i) = s.parse::<i64>() {
            return Cell::Int(i);
        }
        match s {
            "inf" => Cell::Num(f64::INFINITY),
            "-inf" => Cell::Num(f64::NEG_INFINITY),
            "nan" => Cell::Num(f64::NAN),
            _ => s
                .parse::<f64>()
                .map_or_else(|_| Cell::Text(s.to_owned()), Cell::Num),
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => f.write_str(&format_number(*x)),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

/// Shortest round-trip decimal; scientific once |exponent| ≥ 6.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if exp.abs() >= 6 {
        sci
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    /// Echo of the run configuration (JSON only).
    pub config: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_owned(),
            config: Map::new(),
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(command: &str, columns: Vec<String>) -> Self {
        Self {
            command: command.to_owned(),
            config: Map::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Every value of a numeric column.
    pub fn values(&self, name: &str) -> Vec<Option<f64>> {
        let Some(j) = self.column(name) else {
            return Vec::new();
        };
        self.rows.iter().map(|r| r[j].as_f64()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::to_json).collect()))
            .collect();
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
        s.push('\n');
        s
    }

    pub fn read_csv(text: &str) -> Result<Table, String> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let columns: Vec<String> = r
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut t = Table::with_columns("", columns);
        for rec in r.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            t.rows.push(rec.iter().map(Cell::from_field).collect());
        }
        Ok(t)
    }

    pub fn read_json(text: &str) -> Result<Table, String> {
        let doc: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if doc["schema_version"] != json!(SCHEMA_VERSION) {
            return Err(format!(
                "unsupported schema_version {}",
                doc["schema_version"]
            ));
        }
        let columns: Vec<String> = doc["columns"]
            .as_array()
            .ok_or("missing columns")?
            .iter()
            .map(|c| {
                c.as_str()
                    .map(str::to_owned)
                    .ok_or("non-string column name")
            })
            .collect::<Result<_, _>>()?;
        let mut t = Table::with_columns(doc["command"].as_str().unwrap_or(""), columns);
        t.config = doc["config"].as_object().cloned().unwrap_or_default();
        for row in doc["rows"].as_array().ok_or("missing rows")? {
            let cells: Vec<Cell> = row
                .as_array()
                .ok_or("row is not an array")?
                .iter()
                .map(Cell::from_json)
                .collect();
            if cells.len() != t.columns.len() {
                return Err("row width differs from header".into());
            }
            t.rows.push(cells);
        }
        Ok(t)
    }
}
