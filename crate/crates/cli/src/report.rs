use lipgame::rational::{self, Rational};
use lipgame::Profile;
use serde_json::{json, Map, Value};

/// One command's output: what ran, with which settings, what it found, and
/// which result each check instantiates.
pub struct Report {
    pub command: String,
    pub config: Map<String, Value>,
    pub results: Value,
    pub provenance: Vec<&'static str>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let doc = json!({
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "provenance": self.provenance,
        });
        serde_json::to_string_pretty(&doc).expect("reports always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.command);
        flatten("", &self.results, &mut out);
        for p in &self.provenance {
            out.push_str(&format!("basis: {p}\n"));
        }
        out
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => out.push_str(&format!("{prefix}: {other}\n")),
    }
}

pub fn q(v: &Rational) -> Value {
    Value::String(rational::format(v))
}

pub fn qs(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(q).collect())
}

pub fn profile(p: &Profile) -> Value {
    json!(p.0)
}
