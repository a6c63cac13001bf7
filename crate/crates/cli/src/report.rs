use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">")]
    Above,
    #[serde(rename = "==")]
    Equal,
}

/// One asserted comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// `None` when the computation itself failed.
    pub value: Option<f64>,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn compare(name: &str, value: f64, relation: Relation, threshold: f64) -> Self {
        let passed = match relation {
            Relation::Below => value < threshold,
            Relation::Above => value > threshold,
            Relation::Equal => value == threshold,
        };
        Self { name: name.into(), value: Some(value), relation, threshold, passed, note: None }
    }

    pub fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self::compare(name, value, Relation::Below, threshold)
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Self {
        Self::compare(name, value, Relation::Above, threshold)
    }

    pub fn equal(name: &str, value: f64, expected: f64) -> Self {
        Self::compare(name, value, Relation::Equal, expected)
    }

    /// A check whose computation returned an error.
    pub fn errored(name: &str, relation: Relation, threshold: f64, error: impl std::fmt::Display) -> Self {
        Self { name: name.into(), value: None, relation, threshold, passed: false, note: Some(error.to_string()) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A check that was not run, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub skipped: Vec<Skipped>,
    /// Command-specific results, flattened into the top level.
    #[serde(flatten)]
    pub data: Map<String, Value>,
    pub verdict: Verdict,
}

impl Report {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Self {
            command: command.into(),
            version: crate::VERSION.into(),
            config,
            checks: Vec::new(),
            skipped: Vec::new(),
            data: Map::new(),
            verdict: Verdict::Fail,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn skip(&mut self, name: &str, reason: impl Into<String>) {
        self.skipped.push(Skipped { name: name.into(), reason: reason.into() });
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("report data serializes");
        self.data.insert(key.into(), value);
    }

    /// Pass iff there is at least one check and all of them passed.
    pub fn finish(mut self) -> Self {
        let ok = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Two columns, `key,value`, with dotted keys for nested fields.
    pub fn to_csv(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut rows = Vec::new();
        flatten("", &value, &mut rows);
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(["key", "value"]).expect("in-memory write");
        for (k, v) in rows {
            out.write_record([k, v]).expect("in-memory write");
        }
        String::from_utf8(out.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

fn flatten(prefix: &str, value: &Value, rows: &mut Vec<(String, String)>) {
    let join = |key: &str| if prefix.is_empty() { key.to_string() } else { format!("{prefix}.{key}") };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_needs_every_check() {
        let mut r = Report::new("theta verify", RunConfig::default());
        assert!(!r.clone().finish().passed());
        r.push(Check::below("a", 1e-12, 1e-9));
        assert!(r.clone().finish().passed());
        r.push(Check::above("b", 0.0, 0.0));
        assert!(!r.finish().passed());
    }

    #[test]
    fn nan_fails() {
        assert!(!Check::below("x", f64::NAN, 1.0).passed);
        assert!(!Check::above("x", f64::NAN, 1.0).passed);
    }

    #[test]
    fn csv_uses_dotted_keys() {
        let mut r = Report::new("embed verify", RunConfig::default());
        r.push(Check::equal("n", 3.0, 3.0));
        r.set("periods", serde_json::json!({"T_ab": 3.0}));
        let csv = r.finish().to_csv();
        assert!(csv.starts_with("key,value\n"));
        assert!(csv.contains("checks.0.name,n\n"));
        assert!(csv.contains("periods.T_ab,3.0\n"));
        assert!(csv.contains("config.bundle.type,C\n"));
        assert!(csv.contains("verdict,pass\n"));
    }
}
