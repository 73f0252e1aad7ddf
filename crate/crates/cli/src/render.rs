//! Plain-text rendering of run reports.

use std::fmt::Write;

use serde_json::Value;

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.into(), parts.join(", ")));
        }
        other => out.push((prefix.into(), scalar(other))),
    }
}

fn key_values(rows: &[(String, String)], out: &mut String) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        let _ = writeln!(out, "  {k:<width$}  {v}");
    }
}

fn gram_text(g: &Value) -> String {
    g.as_array()
        .map(|rows| {
            rows.iter()
                .map(|r| r.as_array().map(|x| x.iter().map(scalar).collect::<Vec<_>>().join(" ")).unwrap_or_default())
                .collect::<Vec<_>>()
                .join("; ")
        })
        .unwrap_or_default()
}

fn classes_table(result: &Value, out: &mut String) {
    let empty = Vec::new();
    let classes = result["classes"].as_array().unwrap_or(&empty);
    let _ = writeln!(out, "  {:>3}  {:<6}  {:>28}  gram", "#", "parity", "|Aut|");
    for (i, c) in classes.iter().enumerate() {
        let _ = writeln!(
            out,
            "  {:>3}  {:<6}  {:>28}  {}",
            i + 1,
            scalar(&c["parity"]),
            scalar(&c["aut_order"]),
            gram_text(&c["gram"])
        );
    }
    let rows = vec![
        ("classes".to_string(), classes.len().to_string()),
        ("mass_observed".into(), scalar(&result["mass_observed"])),
        ("mass_predicted".into(), scalar(&result["mass_predicted"])),
    ];
    key_values(&rows, out);
}

fn checks_table(result: &Value, out: &mut String) {
    let empty = Vec::new();
    let _ = writeln!(out, "  {:<26}  {:>12}  {:>12}  status", "check", "residual", "tolerance");
    for c in result["checks"].as_array().unwrap_or(&empty) {
        let status = if c["pass"].as_bool() == Some(true) { "pass" } else { "FAIL" };
        let _ = writeln!(
            out,
            "  {:<26}  {:>12.3e}  {:>12.1e}  {status}",
            scalar(&c["name"]),
            c["residual"].as_f64().unwrap_or(f64::NAN),
            c["tolerance"].as_f64().unwrap_or(f64::NAN),
        );
    }
}

pub fn table(command: &str, inputs: &Value, result: &Value, complete: bool, timing_ms: Option<u64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{command}");
    let mut rows = Vec::new();
    flatten("", inputs, &mut rows);
    key_values(&rows, &mut out);
    let _ = writeln!(out, "result");
    match command {
        "classify" => classes_table(result, &mut out),
        "verify" => checks_table(result, &mut out),
        _ => {
            let mut rows = Vec::new();
            flatten("", result, &mut rows);
            key_values(&rows, &mut out);
        }
    }
    let _ = writeln!(out, "complete: {complete}");
    if let Some(ms) = timing_ms {
        let _ = writeln!(out, "time: {ms} ms");
    }
    out
}
