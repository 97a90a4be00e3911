//! CSV and JSON writers. Output never contains timestamps, so identical
//! inputs give byte-identical files.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Column-oriented numeric table with `key=value` metadata.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub data: Vec<Vec<f64>>,
}

/// Twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            data: vec![Vec::new(); columns.len()],
            meta: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }

    pub fn meta_num(self, key: &str, value: f64) -> Self {
        self.meta(key, fmt_num(value))
    }

    pub fn set_column(&mut self, index: usize, values: Vec<f64>) {
        self.data[index] = values;
    }

    fn rows(&self) -> usize {
        self.data.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# fluorospec {VERSION}\n");
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for r in 0..self.rows() {
            let row: Vec<String> = self
                .data
                .iter()
                .map(|c| c.get(r).map_or(String::new(), |x| fmt_num(*x)))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), meta_value(v));
        }
        let mut columns = Map::new();
        for (name, values) in self.columns.iter().zip(&self.data) {
            columns.insert(name.clone(), json!(values));
        }
        json!({ "tool": format!("fluorospec {VERSION}"), "meta": meta, "columns": columns })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => pretty(&self.to_json()),
        }
    }
}

fn meta_value(v: &str) -> Value {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => json!(x),
        _ => json!(v),
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Writes to `path`, or to stdout when `path` is `None` or `-`.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::write(p, content).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))
        }
        _ => match io::stdout().lock().write_all(content.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                Err(CliError::Io(format!("cannot write to stdout: {e}")))
            }
            _ => Ok(()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x", "y"]).meta_num("gamma", 1e7).meta("channel", "pi");
        t.set_column(0, vec![1.0, 2.0]);
        t.set_column(1, vec![0.5, -0.25]);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# fluorospec "));
        assert_eq!(lines[1], "# gamma=1.00000000000e7");
        assert_eq!(lines[2], "# channel=pi");
        assert_eq!(lines[3], "x,y");
        assert_eq!(lines[4], "1.00000000000e0,5.00000000000e-1");
        assert_eq!(lines[5], "2.00000000000e0,-2.50000000000e-1");
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new(&["x"]).meta_num("gamma", 1e7).meta("channel", "pi");
        t.set_column(0, vec![1.0]);
        let v = t.to_json();
        assert_eq!(v["meta"]["gamma"], json!(1e7));
        assert_eq!(v["meta"]["channel"], json!("pi"));
        assert_eq!(v["columns"]["x"], json!([1.0]));
    }
}
