use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Tabular view of a report for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Two-column `key,value` table.
    pub fn key_value(pairs: Vec<(&str, String)>) -> Self {
        let mut t = Table::new(&["key", "value"]);
        for (k, v) in pairs {
            t.push(vec![k.to_string(), v]);
        }
        t
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub op: &'static str,
    pub inputs: Vec<Value>,
    pub algo: String,
    pub results: Value,
    pub table: Table,
    /// Wall time, only when asked for: it breaks byte-identical reruns.
    pub timing_ms: Option<u128>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut v = json!({
            "op": self.op,
            "inputs": self.inputs,
            "algo": self.algo,
            "results": self.results,
        });
        if let Some(ms) = self.timing_ms {
            v["timing_ms"] = json!(ms.to_string());
        }
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.table.render(),
        }
    }
}

pub fn write_output(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}
