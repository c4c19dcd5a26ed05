//! Result rendering.  Tables default to CSV (comment lines carry the schema
//! tag and metadata), records default to JSON.  Floats are printed in their
//! shortest round-trip form so identical inputs give identical bytes and
//! JSON survives parse → emit unchanged.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use crate::args::{Format, GlobalArgs};
use crate::SCHEMA;

/// Column-oriented numeric data with free-form metadata.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub meta: Map<String, Value>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            meta: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }
}

#[derive(Debug, Clone)]
pub enum Output {
    Table(Table),
    /// A JSON object; an optional `records` array of flat objects is its
    /// tabular part.
    Record(Map<String, Value>),
}

pub fn emit(out: &Output, global: &GlobalArgs) -> Result<()> {
    let text = render(out, global.format)?;
    match &global.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn render(out: &Output, format: Option<Format>) -> Result<String> {
    match (out, format) {
        (Output::Table(t), None | Some(Format::Csv)) => Ok(table_csv(t)),
        (Output::Table(t), Some(Format::Json)) => {
            let rows: Vec<Value> = t.rows.iter().map(|r| json!(r)).collect();
            let mut obj = Map::new();
            obj.insert("schema".into(), json!(SCHEMA));
            obj.insert("meta".into(), Value::Object(t.meta.clone()));
            obj.insert("columns".into(), json!(t.columns));
            obj.insert("rows".into(), Value::Array(rows));
            json_text(&Value::Object(obj))
        }
        (Output::Record(r), None | Some(Format::Json)) => {
            let mut obj = r.clone();
            obj.insert("schema".into(), json!(SCHEMA));
            json_text(&Value::Object(obj))
        }
        (Output::Record(r), Some(Format::Csv)) => Ok(record_csv(r)),
    }
}

fn json_text(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn table_csv(t: &Table) -> String {
    let mut s = format!("# schema: {SCHEMA}\n");
    for (k, v) in &t.meta {
        s.push_str(&format!("# {k}: {}\n", scalar_text(v)));
    }
    s.push_str(&t.columns.join(","));
    s.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Scalars become a single-row table; a `records` array becomes one row per
/// record and the remaining scalars move to comment lines.
fn record_csv(r: &Map<String, Value>) -> String {
    let mut s = format!("# schema: {SCHEMA}\n");
    match r.get("records").and_then(Value::as_array) {
        Some(records) => {
            for (k, v) in r.iter().filter(|(k, _)| k.as_str() != "records") {
                s.push_str(&format!("# {k}: {}\n", scalar_text(v)));
            }
            let keys: Vec<&String> = records
                .first()
                .and_then(Value::as_object)
                .map(|o| o.keys().collect())
                .unwrap_or_default();
            s.push_str(&keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(","));
            s.push('\n');
            for rec in records {
                let cells: Vec<String> = keys.iter().map(|k| scalar_text(&rec[k.as_str()])).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
        }
        None => {
            let keys: Vec<&String> = r.keys().collect();
            s.push_str(&keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(","));
            s.push('\n');
            let cells: Vec<String> = keys.iter().map(|k| scalar_text(&r[k.as_str()])).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
    }
    s
}

/// Write through a temporary file in the same directory and rename it into
/// place, so readers never see a partial result.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .with_context(|| format!("output path {} has no file name", path.display()))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| -> Result<()> {
        let mut f = std::fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path).with_context(|| format!("moving result to {}", path.display()))?;
        Ok(())
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}
