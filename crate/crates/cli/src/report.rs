//! JSONL report records and the published schemas.

use std::collections::BTreeMap;

use msk_core::zerosym::Finding;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA_ID: &str = "msk-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Finding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceId {
    pub seed: u64,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub schema: String,
    pub task: String,
    pub instance: InstanceId,
    pub metrics: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub findings: Vec<Finding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReportRecord {
    /// Record from raw metrics. Non-finite metrics cannot be written as JSON
    /// numbers, so they are dropped and the record fails.
    pub fn new(
        task: &str,
        instance: InstanceId,
        metrics: BTreeMap<String, f64>,
        verdict: Verdict,
        findings: Vec<Finding>,
    ) -> ReportRecord {
        let bad: Vec<String> = metrics.iter().filter(|(_, v)| !v.is_finite()).map(|(k, _)| k.clone()).collect();
        let mut rec = ReportRecord {
            schema: SCHEMA_ID.into(),
            task: task.into(),
            instance,
            metrics: metrics.into_iter().filter(|(_, v)| v.is_finite()).collect(),
            verdict,
            runtime_ms: 0.0,
            findings,
            error: None,
        };
        if !bad.is_empty() {
            rec.verdict = Verdict::Fail;
            rec.error = Some(format!("non-finite metrics: {}", bad.join(", ")));
        }
        rec
    }

    pub fn failed(task: &str, instance: InstanceId, error: String) -> ReportRecord {
        ReportRecord {
            schema: SCHEMA_ID.into(),
            task: task.into(),
            instance,
            metrics: BTreeMap::new(),
            verdict: Verdict::Fail,
            runtime_ms: 0.0,
            findings: Vec::new(),
            error: Some(error),
        }
    }
}

/// Hex SHA-256 of a value's canonical JSON text.
pub fn digest<T: Serialize>(value: &T) -> String {
    let text = serde_json::to_string(value).expect("serializable");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Verdict from a list of `(value, tolerance)` checks and any findings.
pub fn verdict_of(checks: &[(f64, f64)], findings: &[Finding]) -> Verdict {
    // NaN fails
    if checks.iter().any(|(v, t)| v.partial_cmp(t).is_none_or(|o| o.is_gt())) {
        Verdict::Fail
    } else if findings.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Finding
    }
}

fn matrix_schema() -> Value {
    json!({
        "description": "d×d complex matrix: {\"re\": rows, \"im\": rows} or rows whose entries are numbers or [re, im] pairs",
        "oneOf": [
            {
                "type": "object",
                "required": ["re"],
                "properties": {"re": {"type": "array"}, "im": {"type": "array"}},
                "additionalProperties": false
            },
            {"type": "array", "items": {"type": "array"}}
        ]
    })
}

fn inner_spec_schema() -> Value {
    json!({
        "type": "object",
        "required": ["type"],
        "properties": {
            "type": {"enum": ["monomial", "bp", "crofoot"]},
            "n": {"type": "integer", "minimum": 1},
            "d": {"type": "integer", "minimum": 1},
            "factors": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["w", "P"],
                    "properties": {
                        "w": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                        "P": matrix_schema()
                    }
                }
            },
            "base": {"type": "object"},
            "W": matrix_schema()
        }
    })
}

pub fn scenario_schema() -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "msk scenario",
        "type": "object",
        "required": ["seed", "d", "theta1", "theta2", "symbol", "tasks"],
        "additionalProperties": false,
        "properties": {
            "seed": {"type": "integer", "minimum": 0},
            "M": {"type": "integer", "minimum": 8, "maximum": 65536, "description": "power of two"},
            "d": {"type": "integer", "minimum": 1, "maximum": 8},
            "theta1": inner_spec_schema(),
            "theta2": inner_spec_schema(),
            "symbol": {
                "type": "object",
                "minProperties": 1,
                "maxProperties": 1,
                "properties": {
                    "coeffs": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}},
                    "random": {
                        "type": "object",
                        "required": ["degree"],
                        "properties": {"degree": {"type": "integer", "minimum": 0}, "scale": {"type": "number"}},
                        "additionalProperties": false
                    }
                },
                "additionalProperties": false
            },
            "tasks": {
                "type": "array",
                "minItems": 1,
                "items": {"enum": ["basis", "tto", "crofoot", "zero", "dim", "selftest"]}
            },
            "tolerances": {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
            "w1": matrix_schema(),
            "w2": matrix_schema()
        }
    })
}

pub fn report_schema() -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "msk report record",
        "type": "object",
        "required": ["schema", "task", "instance", "metrics", "verdict", "runtime_ms"],
        "additionalProperties": false,
        "properties": {
            "schema": {"enum": [SCHEMA_ID]},
            "task": {"type": "string"},
            "instance": {
                "type": "object",
                "required": ["seed", "digest"],
                "additionalProperties": false,
                "properties": {"seed": {"type": "integer", "minimum": 0}, "digest": {"type": "string"}}
            },
            "metrics": {"type": "object", "additionalProperties": {"type": "number"}},
            "verdict": {"enum": ["pass", "fail", "finding"]},
            "runtime_ms": {"type": "number", "minimum": 0},
            "findings": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["check", "instance_seed", "lhs", "rhs", "tolerance", "verdict"],
                    "additionalProperties": false,
                    "properties": {
                        "check": {"type": "string"},
                        "instance_seed": {"type": "integer", "minimum": 0},
                        "lhs": {"type": "number"},
                        "rhs": {"type": "number"},
                        "tolerance": {"type": "number"},
                        "verdict": {"type": "string"}
                    }
                }
            },
            "error": {"type": "string"}
        }
    })
}
