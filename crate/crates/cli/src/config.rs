//! `--config path.json`: a JSON object whose entries become command-line
//! flags appended after the user's own, so config values win.
//!
//! Entries may be grouped in blocks (`"cavity": {"L": 500}`); a block only
//! groups, its key is dropped.  Scalars become `--key=value`, arrays are
//! comma-joined, `true` becomes a bare `--key`, and the top-level `output`
//! entry is an alias for `--format`.  Unknown keys are rejected by the
//! argument parser like unknown flags.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

use crate::{UsageError, SCHEMA};

/// Replace `--config <path>` by the flags it describes.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut out = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let p = it.next().ok_or_else(|| UsageError("--config needs a path".into()))?;
            path = Some(p);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        } else {
            out.push(arg);
        }
    }
    if let Some(p) = path {
        let extra = load(Path::new(&p)).map_err(|e| UsageError(format!("{e:#}")))?;
        out.extend(extra.into_iter().map(OsString::from));
    }
    Ok(out)
}

fn load(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let root: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(map) = root else {
        bail!("config must be a JSON object");
    };
    let mut flags = Vec::new();
    for (key, value) in &map {
        match (key.as_str(), value) {
            ("schema", Value::String(s)) if s == SCHEMA => {}
            ("schema", other) => bail!("config schema must be {SCHEMA:?}, got {other}"),
            ("output", v) => push_flag(&mut flags, "format", v)?,
            (_, Value::Object(block)) => {
                for (k, v) in block {
                    if v.is_object() {
                        bail!("config block {key:?} nests another object at {k:?}");
                    }
                    push_flag(&mut flags, k, v)?;
                }
            }
            (k, v) => push_flag(&mut flags, k, v)?,
        }
    }
    Ok(flags)
}

fn push_flag(flags: &mut Vec<String>, key: &str, value: &Value) -> Result<()> {
    let flag = format!("--{key}");
    match value {
        Value::Bool(true) => flags.push(flag),
        Value::Bool(false) => {}
        Value::Number(n) => flags.push(format!("{flag}={n}")),
        Value::String(s) => flags.push(format!("{flag}={s}")),
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|v| match v {
                    Value::Number(n) => Ok(n.to_string()),
                    Value::String(s) => Ok(s.clone()),
                    other => bail!("config array {key:?} holds {other}"),
                })
                .collect::<Result<Vec<_>>>()?;
            flags.push(format!("{flag}={}", parts.join(",")));
        }
        Value::Null | Value::Object(_) => bail!("config entry {key:?} must be a scalar or array"),
    }
    Ok(())
}
