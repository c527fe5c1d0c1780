//! Structured scenario reports and their deterministic JSON/text forms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::causal::InferenceVerdict;
use crate::error::{Error, Result};
use crate::linalg::ComplexRepr;
use crate::states::PureState;

/// Significant digits kept for every float in emitted reports.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub label: String,
    pub dims: Vec<usize>,
    pub amplitudes: Vec<ComplexRepr>,
}

impl StateRecord {
    pub fn new(label: &str, state: &PureState) -> Self {
        Self {
            label: label.to_string(),
            dims: state.dims().factors().to_vec(),
            amplitudes: state.to_repr(),
        }
    }

    /// `|amplitude|²` at a standard-basis index.
    pub fn weight(&self, index: usize) -> f64 {
        let a = self.amplitudes[index];
        a.re * a.re + a.im * a.im
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub label: String,
    pub description: String,
    pub verdict: InferenceVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub ccr_conclusion: String,
    pub qcr_conclusion: String,
    pub contradiction_resolved: bool,
    /// The step-wise quantum probabilities reproduce the directly computed ones.
    pub qcr_consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub parameters: BTreeMap<String, f64>,
    pub prior: String,
    pub states: Vec<StateRecord>,
    /// Named scalar results (probabilities, norms, fidelities).
    pub quantities: BTreeMap<String, f64>,
    pub steps: Vec<Step>,
    pub headline: Headline,
    pub notes: Vec<String>,
}

impl ScenarioReport {
    pub fn step(&self, label: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.label == label)
    }

    pub fn state(&self, label: &str) -> Option<&StateRecord> {
        self.states.iter().find(|s| s.label == label)
    }

    pub fn quantity(&self, name: &str) -> Option<f64> {
        self.quantities.get(name).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::InvalidParameter(format!("unknown format {other:?}"))),
        }
    }
}

pub(crate) fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// Serializes the report. JSON output has sorted keys and floats rounded to
/// twelve significant digits; text output is a one-row-per-step table.
pub fn emit_report(report: &ScenarioReport, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let value = serde_json::to_value(report)
                .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
            let mut out = serde_json::to_string_pretty(&round_value(value))
                .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
            out.push('\n');
            Ok(out)
        }
        OutputFormat::Text => Ok(emit_text(report)),
    }
}

/// Several reports: a JSON array, or the text forms separated by blank lines.
pub fn emit_reports(reports: &[ScenarioReport], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let value = serde_json::to_value(reports)
                .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
            let mut out = serde_json::to_string_pretty(&round_value(value))
                .map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))?;
            out.push('\n');
            Ok(out)
        }
        OutputFormat::Text => Ok(reports.iter().map(emit_text).collect::<Vec<_>>().join("\n")),
    }
}

fn fmt_num(x: f64) -> String {
    format!("{:.9}", round_sig(x))
}

fn emit_text(report: &ScenarioReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", report.scenario);
    let params: Vec<String> = report
        .parameters
        .iter()
        .map(|(k, v)| format!("{k}={}", round_sig(*v)))
        .collect();
    if !params.is_empty() {
        let _ = writeln!(out, "parameters: {}", params.join(", "));
    }
    let _ = writeln!(out, "prior: {}", report.prior);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<10} {:<8} {:<14} {:<14} {:>12} {:>12} {:>12} {:>5} {:>5}",
        "step", "dir", "cause", "effect", "ccr", "qcr", "fidelity", "dCCR", "dQCR"
    );
    for s in &report.steps {
        let v = &s.verdict;
        let _ = writeln!(
            out,
            "{:<10} {:<8} {:<14} {:<14} {:>12} {:>12} {:>12} {:>5} {:>5}",
            s.label,
            v.direction.to_string(),
            v.cause_label,
            v.effect_label,
            fmt_num(v.ccr_probability),
            fmt_num(v.qcr_probability),
            fmt_num(v.qcr_match_fidelity),
            if v.deterministic_ccr { "yes" } else { "no" },
            if v.deterministic_qcr { "yes" } else { "no" },
        );
    }
    let _ = writeln!(out);
    for (k, v) in &report.quantities {
        let _ = writeln!(out, "{k} = {}", fmt_num(*v));
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "CCR: {}", report.headline.ccr_conclusion);
    let _ = writeln!(out, "QCR: {}", report.headline.qcr_conclusion);
    let _ = writeln!(
        out,
        "contradiction resolved: {}",
        report.headline.contradiction_resolved
    );
    let _ = writeln!(out, "qcr consistent: {}", report.headline.qcr_consistent);
    for n in &report.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert_eq!(round_sig(-0.0), 0.0);
        assert_eq!(round_sig(0.5), 0.5);
        assert_eq!(round_sig(1.0 - 1e-15), 1.0);
        assert_eq!(round_sig(2.5e-20), 2.5e-20);
    }

    #[test]
    fn rounding_walks_nested_values() {
        let v = serde_json::json!({"b": [0.1234567890123456], "a": {"x": 2.0000000000001}});
        let r = round_value(v);
        assert_eq!(r["b"][0].as_f64().unwrap(), 0.123456789012);
        assert_eq!(r["a"]["x"].as_f64().unwrap(), 2.0);
        let keys: Vec<_> = r.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, vec!["a", "b"]);
    }

    #[test]
    fn format_parsing() {
        assert_eq!("json".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert!("yaml".parse::<OutputFormat>().is_err());
    }
}
