use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::input::SCHEMA_VERSION;
use crate::TOOLKIT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "==")]
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub toolkit_version: &'static str,
    pub command: String,
    pub parameters: Map<String, Value>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub details: Map<String, Value>,
    pub warnings: Vec<String>,
    pub wall_time_ms: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            toolkit_version: TOOLKIT_VERSION,
            command: command.to_string(),
            parameters: Map::new(),
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
            details: Map::new(),
            warnings: Vec::new(),
            wall_time_ms: 0.0,
            started: Some(Instant::now()),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.into(), to_value(value));
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.into(), value);
        self
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.details.insert(key.into(), to_value(value));
        self
    }

    pub fn warn(&mut self, message: impl Into<String>) -> &mut Self {
        self.warnings.push(message.into());
        self
    }

    /// Passes iff `value ≤ threshold` (NaN fails).
    pub fn at_most(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        self.push(name, value <= threshold, value, threshold, Comparison::AtMost)
    }

    /// Passes iff `value ≥ threshold` (NaN fails).
    pub fn at_least(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        self.push(name, value >= threshold, value, threshold, Comparison::AtLeast)
    }

    /// Boolean check; value is 1 or 0.
    pub fn holds(&mut self, name: &str, ok: bool) -> &mut Self {
        self.push(name, ok, if ok { 1.0 } else { 0.0 }, 1.0, Comparison::Holds)
    }

    fn push(&mut self, name: &str, passed: bool, value: f64, threshold: f64, comparison: Comparison) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            passed,
            value,
            threshold,
            comparison,
        });
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.passed);
        if let Some(start) = self.started.take() {
            self.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        }
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("plain data serializes")
}

/// Report JSON with `wall_time_ms` removed, for determinism comparisons.
pub fn without_timing(json: &str) -> Value {
    let mut v: Value = serde_json::from_str(json).expect("report JSON");
    if let Some(obj) = v.as_object_mut() {
        obj.remove("wall_time_ms");
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flag_and_nan() {
        let mut r = Report::new("x");
        r.at_most("a", 1.0, 2.0).at_least("b", 0.0, -1.0).holds("c", true);
        let r = r.finish();
        assert!(r.passed);
        let mut r = Report::new("x");
        r.at_most("nan", f64::NAN, 1.0);
        let r = r.finish();
        assert!(!r.passed);
        assert!(r.to_json().contains("\"value\": null"));
    }

    #[test]
    fn timing_is_stripped() {
        let mut r = Report::new("x");
        r.param("k", 3).tolerance("tol", 1e-9).detail("d", [1.0, 2.0]);
        let a = r.clone().finish().to_json();
        let b = r.finish().to_json();
        assert_eq!(without_timing(&a), without_timing(&b));
        assert!(without_timing(&a).get("wall_time_ms").is_none());
    }
}
