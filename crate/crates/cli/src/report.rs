//! Report rendering: CSV with `#` metadata lines or a single JSON document, plus a
//! content hash over the body and an optional timestamp sidecar.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
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

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// A table of results plus scalar summaries; `extra` is carried only in JSON output.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(&'static str, Cell)>,
    pub notes: Vec<String>,
    pub extra: Option<Value>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Report { columns: columns.to_vec(), ..Default::default() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn summary(&mut self, key: &'static str, value: impl Into<Cell>) {
        self.summary.push((key, value.into()));
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }
}

/// Identity of the run, echoed in the report header.
pub struct Meta {
    pub command: String,
    pub config: Map<String, Value>,
}

/// Git-style object hash: SHA-256 of `blob <len>\0<body>`.
pub fn content_hash(body: &str) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    format!("sha256:{:x}", h.finalize())
}

fn config_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn csv_body(report: &Report) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&report.columns)?;
    for row in &report.rows {
        w.write_record(row.iter().map(Cell::csv))?;
    }
    let mut body = String::from_utf8(w.into_inner().map_err(|e| e.into_error())?)
        .expect("csv output is UTF-8");
    for (key, value) in &report.summary {
        let _ = writeln!(body, "# summary.{key} = {}", value.csv());
    }
    Ok(body)
}

fn json_body(report: &Report) -> Value {
    let rows: Vec<Value> =
        report.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
    let summary: Map<String, Value> =
        report.summary.iter().map(|(k, v)| (k.to_string(), v.json())).collect();
    let mut body = json!({ "columns": report.columns, "rows": rows, "summary": summary });
    if let Some(extra) = &report.extra {
        body["extra"] = extra.clone();
    }
    body
}

/// Renders the full document and returns it with the body hash.
pub fn render(report: &Report, meta: &Meta, format: Format) -> Result<(String, String), csv::Error> {
    let version = env!("CARGO_PKG_VERSION");
    match format {
        Format::Csv => {
            let body = csv_body(report)?;
            let hash = content_hash(&body);
            let mut out = format!("# tool = sew {version}\n# command = {}\n", meta.command);
            for (k, v) in &meta.config {
                let _ = writeln!(out, "# config.{k} = {}", config_value(v));
            }
            for n in &report.notes {
                let _ = writeln!(out, "# note = {n}");
            }
            let _ = writeln!(out, "# content-hash = {hash}");
            out.push_str(&body);
            Ok((out, hash))
        }
        Format::Json => {
            let body = json_body(report);
            let hash = content_hash(&body.to_string());
            let doc = json!({
                "meta": {
                    "tool": "sew",
                    "version": version,
                    "command": meta.command,
                    "config": meta.config,
                    "notes": report.notes,
                    "content_hash": hash,
                },
                "body": body,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
            text.push('\n');
            Ok((text, hash))
        }
    }
}

/// Writes `<output>.sidecar.json` holding the run timestamp, kept out of the report itself.
pub fn write_sidecar(output: &Path, hash: &str) -> std::io::Result<()> {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut name = output.as_os_str().to_owned();
    name.push(".sidecar.json");
    let doc = json!({ "content_hash": hash, "unix_time": now });
    std::fs::write(name, format!("{doc:#}\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_blob_sha256() {
        // hashlib.sha256(b"blob 6\0hello\n")
        assert_eq!(
            content_hash("hello\n"),
            "sha256:2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }

    #[test]
    fn floats_round_trip_through_csv() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300] {
            let text = Cell::Float(v).csv();
            assert_eq!(text.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_quotes_and_hashes_body_only() {
        let mut r = Report::new(&["name", "value"]);
        r.row(vec!["a,b".into(), 1.5.into()]);
        r.summary("total", 3usize);
        let meta = Meta { command: "test".into(), config: Map::new() };
        let (text, hash) = render(&r, &meta, Format::Csv).unwrap();
        let body = "name,value\n\"a,b\",1.5000000000000000e0\n# summary.total = 3\n";
        assert!(text.ends_with(body));
        assert_eq!(hash, content_hash(body));
    }
}
