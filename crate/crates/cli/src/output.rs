//! Deterministic CSV/JSON writers.
//!
//! Floats are written with 17 significant digits so every value reads back
//! to the same double. JSON records are assembled by hand for the same
//! reason; non-finite floats become `null`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nsit_core::analysis::GridSpec;
use serde_json::{json, Value};

use crate::config::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
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

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n', '\r']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Float(v) if v.is_finite() => format_float(*v),
            Cell::Float(_) => "null".to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => Value::String(s.clone()).to_string(),
        }
    }
}

/// Named columns and rows of cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn records_json(&self) -> String {
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n    {" } else { ",\n    {" });
            for (j, (name, cell)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: {}", Value::String(name.clone()), cell.json());
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]" } else { "\n  ]" });
        out
    }
}

pub fn grid_json(spec: &GridSpec) -> Value {
    json!({
        "lo": spec.lo,
        "hi": spec.hi,
        "total_points": spec.total_points,
        "coarse_points": spec.config.coarse_points,
        "feature_points": spec.config.feature_points,
        "span_widths": spec.config.span_widths,
        "sinh_scale": spec.config.sinh_scale,
        "anchors": spec.anchors.iter().map(|a| json!({
            "kind": a.kind.label(),
            "center": a.center,
            "width": a.width,
        })).collect::<Vec<_>>(),
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes `table` under `dir` as `<stem>.csv` plus `<stem>.meta.json`, or as
/// a single `<stem>.json`. Returns the paths written.
pub fn write_output(dir: &Path, stem: &str, format: Format, table: &Table, metadata: &Value) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let meta = serde_json::to_string_pretty(metadata).expect("metadata is plain JSON");
    match format {
        Format::Csv => {
            let data = dir.join(format!("{stem}.csv"));
            let side = dir.join(format!("{stem}.meta.json"));
            write_file(&data, &table.to_csv())?;
            write_file(&side, &(meta + "\n"))?;
            Ok(vec![data, side])
        }
        Format::Json => {
            let path = dir.join(format!("{stem}.json"));
            let meta = meta.replace('\n', "\n  ");
            let text = format!("{{\n  \"metadata\": {meta},\n  \"records\": {}\n}}\n", table.records_json());
            write_file(&path, &text)?;
            Ok(vec![path])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(["x", "label", "ok"]);
        t.push(vec![0.1.into(), "a, \"b\"".into(), true.into()]);
        t.push(vec![f64::NAN.into(), "plain".into(), false.into()]);
        t
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_quotes_text_with_separators() {
        assert_eq!(
            sample().to_csv(),
            "x,label,ok\n1.0000000000000001e-1,\"a, \"\"b\"\"\",true\nNaN,plain,false\n"
        );
    }

    #[test]
    fn json_document_parses() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_output(dir.path(), "t", Format::Json, &sample(), &json!({"tool": "nsit"})).unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(v["metadata"]["tool"], "nsit");
        assert_eq!(v["records"][0]["x"], 0.1);
        assert_eq!(v["records"][1]["x"], Value::Null);
        assert_eq!(v["records"][0]["label"], "a, \"b\"");
    }
}
