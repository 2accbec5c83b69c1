//! Run reports and their JSON and text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::detectors::{Diagnostic, Findings, Timings};
use crate::fact_model::{Subject, Violation};

pub const TOOL_VERSION: &str = concat!("ethoscan ", env!("CARGO_PKG_VERSION"));

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunReport {
    pub tool_version: String,
    pub evaluation_date: NaiveDate,
    pub inputs: Vec<Subject>,
    pub violations: Vec<Violation>,
    pub diagnostics: Vec<Diagnostic>,
    /// Milliseconds per detector code; omitted unless requested since it
    /// varies between runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    pub fn new(evaluation_date: NaiveDate, inputs: Vec<Subject>, findings: Findings) -> Self {
        let mut violations = findings.violations;
        violations.sort_by(|a, b| (&a.subject, a.behavior_type).cmp(&(&b.subject, b.behavior_type)));
        let mut diagnostics = findings.diagnostics;
        diagnostics.sort();
        RunReport {
            tool_version: TOOL_VERSION.to_string(),
            evaluation_date,
            inputs,
            violations,
            diagnostics,
            timings: None,
        }
    }

    pub fn with_timings(mut self, timings: &Timings) -> Self {
        self.timings = Some(
            timings
                .iter()
                .map(|(t, ms)| (t.code().to_string(), (ms * 1000.0).round() / 1000.0))
                .collect(),
        );
        self
    }

    pub fn exit_status(&self) -> i32 {
        exit_status(false, !self.violations.is_empty(), !self.diagnostics.is_empty())
    }

    /// Pretty-printed JSON with object keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report is serializable");
        let mut out = serde_json::to_string_pretty(&sorted(value)).expect("value is serializable");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let inputs: Vec<String> = self.inputs.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{} | evaluation date {}", self.tool_version, self.evaluation_date);
        let _ = writeln!(out, "inputs: {}", inputs.join(", "));
        for v in &self.violations {
            let _ = writeln!(
                out,
                "\npotential violation {} ({}) in {}",
                v.behavior_type,
                v.behavior_type.title(),
                v.subject
            );
            for e in &v.evidence {
                match &e.location {
                    Some(loc) if loc != &e.value => {
                        let _ = writeln!(out, "  {}: {} [{}]", e.label, e.value, loc);
                    }
                    _ => {
                        let _ = writeln!(out, "  {}: {}", e.label, e.value);
                    }
                }
            }
            let _ = writeln!(out, "  derivation:");
            for step in &v.rule_trace {
                let _ = writeln!(out, "    {step}");
            }
        }
        for d in &self.diagnostics {
            let _ = write!(out, "\ncannot evaluate {} for {}: {}", d.behavior_type, d.subject, d.reason);
            if let Some(loc) = &d.location {
                let _ = write!(out, " [{loc}]");
            }
            out.push('\n');
        }
        if let Some(timings) = &self.timings {
            let _ = writeln!(out);
            for (code, ms) in timings {
                let _ = writeln!(out, "time {code}: {ms:.3} ms");
            }
        }
        let _ = writeln!(
            out,
            "\n{} potential violation(s), {} subject(s) not fully evaluated; findings need manual confirmation",
            self.violations.len(),
            self.diagnostics.len()
        );
        out
    }
}

/// Exit status of a run: an error outranks unevaluated subjects, which
/// outrank violations.
pub fn exit_status(error: bool, violations: bool, diagnostics: bool) -> i32 {
    if error {
        EXIT_ERROR
    } else if diagnostics {
        EXIT_PARTIAL
    } else if violations {
        EXIT_VIOLATIONS
    } else {
        EXIT_CLEAN
    }
}

fn sorted(value: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match value {
        Value::Object(map) => {
            let ordered: BTreeMap<String, Value> = map.into_iter().map(|(k, v)| (k, sorted(v))).collect();
            Value::Object(ordered.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sorted).collect()),
        other => other,
    }
}
