//! Shared output model for the command handlers.
//!
//! Every subcommand produces a [`Document`]: a flat list of summary fields,
//! an optional table, and an optional pass/fail verdict.  The document is
//! rendered to text, JSON, or CSV without the handlers knowing which format
//! was requested, so all three views stay consistent.

use serde_json::Value;
use std::fmt::Write as _;

/// Output format selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// A rectangular table with named columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Structured result of one subcommand run.
#[derive(Debug, Clone)]
pub struct Document {
    /// Subcommand name, echoed into the output for provenance.
    pub command: &'static str,
    /// Unix timestamp in seconds; `None` when reproducible output was asked for.
    pub generated_at: Option<u64>,
    /// Ordered key/value pairs describing the run.
    pub summary: Vec<(&'static str, Value)>,
    /// Optional detail table.
    pub table: Option<Table>,
    /// Overall verdict; `None` for purely informational commands.
    pub passed: Option<bool>,
}

impl Document {
    pub fn new(command: &'static str) -> Self {
        Document {
            command,
            generated_at: None,
            summary: Vec::new(),
            table: None,
            passed: None,
        }
    }

    pub fn push(&mut self, key: &'static str, value: Value) {
        self.summary.push((key, value));
    }

    pub fn push_f64(&mut self, key: &'static str, value: f64) {
        self.push(key, json_f64(value));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        if let Some(ts) = self.generated_at {
            let _ = writeln!(out, "generated-at: {ts}");
        }
        for (key, value) in &self.summary {
            let _ = writeln!(out, "{key}: {}", display_value(value));
        }
        if let Some(table) = &self.table {
            out.push('\n');
            out.push_str(&render_text_table(table));
        }
        if let Some(passed) = self.passed {
            let _ = writeln!(out, "\nresult: {}", if passed { "PASS" } else { "FAIL" });
        }
        out
    }

    fn render_json(&self) -> String {
        let mut root = serde_json::Map::new();
        root.insert("command".into(), Value::String(self.command.into()));
        if let Some(ts) = self.generated_at {
            root.insert("generated_at".into(), Value::from(ts));
        }
        let mut summary = serde_json::Map::new();
        for (key, value) in &self.summary {
            summary.insert((*key).into(), value.clone());
        }
        root.insert("summary".into(), Value::Object(summary));
        if let Some(table) = &self.table {
            let columns: Vec<Value> = table
                .columns
                .iter()
                .map(|c| Value::String((*c).into()))
                .collect();
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| Value::Array(row.clone()))
                .collect();
            let mut t = serde_json::Map::new();
            t.insert("columns".into(), Value::Array(columns));
            t.insert("rows".into(), Value::Array(rows));
            root.insert("table".into(), Value::Object(t));
        }
        if let Some(passed) = self.passed {
            root.insert("passed".into(), Value::Bool(passed));
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(root))
            .expect("document serialization cannot fail");
        text.push('\n');
        text
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command={}", self.command);
        if let Some(ts) = self.generated_at {
            let _ = writeln!(out, "# generated_at={ts}");
        }
        for (key, value) in &self.summary {
            let _ = writeln!(out, "# {key}={}", display_value(value));
        }
        if let Some(passed) = self.passed {
            let _ = writeln!(out, "# passed={passed}");
        }
        if let Some(table) = &self.table {
            let _ = writeln!(out, "{}", table.columns.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        out
    }
}

/// Wrap an `f64` as a JSON value, mapping non-finite inputs to strings so the
/// document always serializes.
pub fn json_f64(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None => Value::String(x.to_string()),
    }
}

/// Format a float with 12 significant digits, plain decimal notation in the
/// human-scale range and scientific notation outside it.  The decimal
/// separator is always `.` regardless of locale.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-4..=14).contains(&exponent) {
        let decimals = (11 - exponent).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let sci = format!("{x:.11e}");
        compact_scientific(&sci)
    }
}

/// Trim trailing zeros from the mantissa of a `{:e}`-formatted float.
fn compact_scientific(s: &str) -> String {
    match s.split_once('e') {
        Some((mantissa, exp)) if mantissa.contains('.') => {
            let trimmed = mantissa.trim_end_matches('0').trim_end_matches('.');
            format!("{trimmed}e{exp}")
        }
        _ => s.to_string(),
    }
}

/// Human-readable rendering of one JSON value for text and CSV output.
fn display_value(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.to_string()
            } else if let Some(u) = n.as_u64() {
                u.to_string()
            } else {
                fmt_f64(n.as_f64().unwrap_or(f64::NAN))
            }
        }
        Value::Bool(b) => b.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Quote a CSV cell only when it contains a delimiter, quote, or newline.
fn csv_cell(value: &Value) -> String {
    let raw = display_value(value);
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

fn render_text_table(table: &Table) -> String {
    let mut widths: Vec<usize> = table.columns.iter().map(|c| c.len()).collect();
    let rendered: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|row| row.iter().map(display_value).collect())
        .collect();
    for row in &rendered {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = table
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{c:<width$}", width = widths[i]))
        .collect();
    let _ = writeln!(out, "{}", header.join("  ").trim_end());
    let rule_len = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
    let _ = writeln!(out, "{}", "-".repeat(rule_len));
    for row in &rendered {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, cell)| format!("{cell:<width$}", width = widths[i]))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}
