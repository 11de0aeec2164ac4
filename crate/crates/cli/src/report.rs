//! Report envelope and rendering to JSON, CSV or text.

use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub tool_version: String,
    pub command: Vec<String>,
    pub seeds: Vec<u64>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub payload: Value,
}

impl ReportEnvelope {
    pub fn new(command: Vec<String>, seeds: Vec<u64>, payload: Value) -> Self {
        ReportEnvelope {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seeds,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            payload,
        }
    }
}

/// A payload plus an optional row view for CSV output.
pub struct Report {
    pub envelope: ReportEnvelope,
    pub rows: Option<Vec<Value>>,
}

#[derive(Debug)]
pub struct NotTabular;

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Write `rows` (flat JSON objects sharing the first row's keys) as CSV.
pub fn write_csv<W: Write>(rows: &[Value], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = match rows.first() {
        Some(Value::Object(map)) => map.keys().cloned().collect(),
        _ => Vec::new(),
    };
    if !header.is_empty() {
        w.write_record(&header)?;
    }
    for row in rows {
        let record: Vec<String> = header.iter().map(|k| cell(&row[k])).collect();
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn text_lines(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                match v {
                    Value::Object(_) => text_lines(&key, v, out),
                    Value::Array(items) if items.iter().any(Value::is_object) => {
                        out.push(format!("{key}: {} entries", items.len()))
                    }
                    _ => out.push(format!("{key}: {}", cell(v))),
                }
            }
        }
        other => out.push(cell(other)),
    }
}

pub fn render_report(report: &Report, format: Format) -> Result<Vec<u8>, NotTabular> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.envelope).expect("values serialize");
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let rows = report.rows.as_ref().ok_or(NotTabular)?;
            let mut buf = Vec::new();
            write_csv(rows, &mut buf).expect("writing to memory");
            Ok(buf)
        }
        Format::Text => {
            let mut lines = Vec::new();
            text_lines("", &report.envelope.payload, &mut lines);
            let mut s = lines.join("\n");
            s.push('\n');
            Ok(s.into_bytes())
        }
    }
}
