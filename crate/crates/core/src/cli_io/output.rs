use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::{CliError, ResultBundle, Table};

pub const SUMMARY_SCHEMA: &str = "fishtax-result/1";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn write_table(dir: &Path, t: &Table) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}.csv", t.name));
    let mut text = t.columns.join(",");
    text.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    let mut file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// One CSV per table plus `summary.json`, all inside `dir`.
pub fn write_bundle(b: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = vec![];
    for t in &b.tables {
        written.push(write_table(dir, t)?);
    }
    let tables: Vec<Value> =
        b.tables.iter().map(|t| json!({ "file": format!("{}.csv", t.name), "rows": t.rows.len() })).collect();
    let doc = json!({
        "schema": SUMMARY_SCHEMA,
        "command": b.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": b.config,
        "summary": b.summary,
        "tables": tables,
    });
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    written.push(path);
    Ok(written)
}
