//! Reports are JSON first; the text form is a rendering of the same value.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    /// Index of the op in the pipeline.
    pub op: usize,
    pub invariant: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpResult {
    pub index: usize,
    pub op: String,
    pub status: OpStatus,
    pub output: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OpStatus {
    Ok,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub total_ms: f64,
    pub ops_ms: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub scenario: Value,
    pub seed: u64,
    pub depth: usize,
    pub results: Vec<OpResult>,
    pub checklist: Vec<Check>,
    pub passed: bool,
    pub timing: Timing,
}

impl Report {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("reports serialize")
    }

    /// The report without its timing field, the form used for comparisons.
    pub fn comparable(&self) -> Value {
        strip_timing(self.to_json())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checklist.iter().filter(|c| !c.pass)
    }

    pub fn render_text(&self) -> String {
        render_text(&self.to_json())
    }
}

pub fn strip_timing(mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.remove("timing");
    }
    v
}

/// Paths where two comparable reports differ, capped at `limit`.
pub fn diff_paths(left: &Value, right: &Value, limit: usize) -> Vec<String> {
    fn walk(path: String, l: &Value, r: &Value, out: &mut Vec<String>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        match (l, r) {
            (Value::Object(a), Value::Object(b)) => {
                let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
                for k in keys {
                    match (a.get(k), b.get(k)) {
                        (Some(x), Some(y)) => walk(format!("{path}/{k}"), x, y, out, limit),
                        _ => out.push(format!("{path}/{k}")),
                    }
                }
            }
            (Value::Array(a), Value::Array(b)) if a.len() == b.len() => {
                for (i, (x, y)) in a.iter().zip(b).enumerate() {
                    walk(format!("{path}/{i}"), x, y, out, limit);
                }
            }
            _ if l != r => out.push(if path.is_empty() { "/".into() } else { path }),
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(String::new(), &strip_timing(left.clone()), &strip_timing(right.clone()), &mut out, limit);
    out
}

fn compact(v: &Value) -> String {
    let s = v.to_string();
    if s.len() > 160 {
        format!("{}…", &s[..s.char_indices().nth(157).map_or(s.len(), |(i, _)| i)])
    } else {
        s
    }
}

pub fn render_text(report: &Value) -> String {
    let mut out = String::new();
    let name = report["scenario"]["name"].as_str().unwrap_or("?");
    let _ = writeln!(out, "scenario {name} (seed {}, depth {})", report["seed"], report["depth"]);
    if let Some(results) = report["results"].as_array() {
        for r in results {
            let _ = writeln!(out, "  [{}] {} {}", r["index"], r["op"].as_str().unwrap_or("?"), r["status"].as_str().unwrap_or("?"));
            if let Value::Object(fields) = &r["output"] {
                for (k, v) in fields {
                    let _ = writeln!(out, "      {k}: {}", compact(v));
                }
            }
        }
    }
    let _ = writeln!(out, "checklist:");
    if let Some(checks) = report["checklist"].as_array() {
        for c in checks {
            let mark = if c["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
            let _ = write!(out, "  {mark} [{}] {}", c["op"], c["invariant"].as_str().unwrap_or("?"));
            if let Some(d) = c["detail"].as_str() {
                let _ = write!(out, " ({d})");
            }
            out.push('\n');
        }
    }
    let verdict = if report["passed"].as_bool() == Some(true) { "passed" } else { "FAILED" };
    let _ = writeln!(out, "{verdict}");
    out
}
