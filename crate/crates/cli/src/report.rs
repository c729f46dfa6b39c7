//! Line-delimited JSON reports: a header record, one record per case, and a
//! summary record last. The CSV form mirrors the case records.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::CliError;

pub const SCHEMA: &str = "qdiscord.report/1";
pub const TOOL: &str = "qdiscord";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Records,
    Csv,
}

/// Rounds to 12 significant digits so reports do not carry platform noise
/// in the last bits.
pub fn significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Fixed-point text with 12 decimals, the form quoted in examples.
pub fn fixed(x: f64) -> String {
    let s = format!("{x:.12}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(significant(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn tagged(kind: &str, body: Value) -> Value {
    let mut map = Map::new();
    map.insert("record".into(), Value::String(kind.into()));
    match body {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("data".into(), other);
        }
    }
    let mut v = Value::Object(map);
    round_numbers(&mut v);
    v
}

#[derive(Debug, Clone)]
pub struct Report {
    header: Value,
    cases: Vec<Value>,
    summary: Value,
}

impl Report {
    pub fn new(command: &str, config: &impl Serialize, seed: u64) -> Self {
        let header = tagged(
            "header",
            json!({
                "schema": SCHEMA,
                "tool": TOOL,
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "config": config,
                "seed": seed,
            }),
        );
        Report { header, cases: Vec::new(), summary: tagged("summary", json!({})) }
    }

    pub fn push_case(&mut self, case: Value) {
        self.cases.push(tagged("case", case));
    }

    pub fn set_summary(&mut self, summary: Value) {
        self.summary = tagged("summary", summary);
    }

    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for v in std::iter::once(&self.header).chain(&self.cases).chain(std::iter::once(&self.summary)) {
            out.push_str(&serde_json::to_string(v).expect("report values serialize"));
            out.push('\n');
        }
        out
    }

    /// Scalar fields of the case records, nested objects flattened with dots.
    /// Arrays such as bases are left to the record form.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let rows: Vec<Vec<(String, String)>> = self
            .cases
            .iter()
            .map(|case| {
                let mut cells = Vec::new();
                flatten("", case, &mut cells);
                cells
            })
            .collect();
        let mut columns: Vec<String> = Vec::new();
        for (key, _) in rows.iter().flatten() {
            if !columns.contains(key) {
                columns.push(key.clone());
            }
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&columns).map_err(csv_error)?;
        for row in &rows {
            let record = columns.iter().map(|c| {
                row.iter().find(|(k, _)| k == c).map(|(_, v)| v.as_str()).unwrap_or("")
            });
            writer.write_record(record).map_err(csv_error)?;
        }
        let bytes = writer.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Records => Ok(self.to_records()),
            Format::Csv => self.to_csv(),
        }
    }

    /// Writes to `path`, or stdout when absent.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<(), CliError> {
        let text = self.render(format)?;
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::Output(format!("{}: {e}", p.display()))),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Output(e.to_string())),
        }
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Output(e.to_string())
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        Value::Array(_) => {}
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
