//! Execution trace records and harness input bindings.
//!
//! A trace file is line-delimited JSON: one record per region-scope entry
//! event (a function activation or one dynamic entry of an instrumented
//! loop). Records are self-contained — they carry the variable values at
//! scope entry, the correlation signs of the signature, the trip counts
//! accumulated over the scope, the raw summands of guarded index
//! expressions, and whether every bounds check inside the scope passed —
//! so the knowledge-base builder needs nothing but trace files.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::SiteId;

/// Region scope: a whole function activation or one instrumented loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scope {
    Function,
    Loop(SiteId),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Function => write!(f, "function"),
            Scope::Loop(site) => write!(f, "loop:{site}"),
        }
    }
}

impl Scope {
    pub fn parse(s: &str) -> Option<Self> {
        if s == "function" {
            return Some(Scope::Function);
        }
        let site = s.strip_prefix("loop:")?.parse().ok()?;
        Some(Scope::Loop(site))
    }
}

impl Serialize for Scope {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Scope::parse(&s).ok_or_else(|| serde::de::Error::custom("invalid scope"))
    }
}

/// One trace record. `vars` holds raw (untransformed) values at scope
/// entry; keys ending in `.len` are array lengths. `trip_counts` holds the
/// counters accumulated over the scope (final values for function scopes,
/// per-entry deltas for loop scopes).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub func: String,
    pub scope: Scope,
    pub vars: BTreeMap<String, i64>,
    pub trip_counts: BTreeMap<String, u64>,
    pub all_checks_passed: bool,
    /// Correlation sign per signature variable: "+" or "-".
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub correlations: BTreeMap<String, String>,
    /// Raw summand values of guarded access-index expressions, used by the
    /// knowledge base's integer-overflow guard.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub index_terms: Vec<Vec<i64>>,
    /// False when an index in the scope has a multiplicative trip-count
    /// dependence; such points may enter union regions but not hulls.
    #[serde(default = "default_true", skip_serializing_if = "is_true")]
    pub linear: bool,
}

fn default_true() -> bool {
    true
}

#[allow(clippy::trivially_copy_pass_by_ref)]
fn is_true(b: &bool) -> bool {
    *b
}

impl TraceRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace records always serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self, TraceParseError> {
        serde_json::from_str(line).map_err(|e| TraceParseError {
            message: e.to_string(),
        })
    }
}

/// Parse a whole trace file (JSON lines; blank lines ignored).
pub fn parse_trace_lines(text: &str) -> Result<Vec<TraceRecord>, TraceParseError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = TraceRecord::from_json_line(line).map_err(|e| TraceParseError {
            message: alloc::format!("line {}: {}", i + 1, e.message),
        })?;
        records.push(rec);
    }
    Ok(records)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceParseError {
    pub message: String,
}

impl fmt::Display for TraceParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "trace parse error: {}", self.message)
    }
}

/// A value supplied by the harness for an `input` statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputValue {
    Int(i64),
    Array(Vec<i64>),
}

/// Harness-supplied bindings for one execution, keyed by input name.
pub type InputBindings = BTreeMap<String, InputValue>;

/// Parse an input file: one JSON object, e.g. `{"x": 5, "a": [1,2,3]}`.
pub fn parse_inputs(text: &str) -> Result<InputBindings, TraceParseError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| TraceParseError {
        message: e.to_string(),
    })?;
    let serde_json::Value::Object(map) = value else {
        return Err(TraceParseError {
            message: "input file must be a JSON object".to_string(),
        });
    };
    let mut bindings = InputBindings::new();
    for (name, v) in map {
        let value = match v {
            serde_json::Value::Number(n) => {
                InputValue::Int(n.as_i64().ok_or_else(|| TraceParseError {
                    message: alloc::format!("input `{name}` is not a 64-bit integer"),
                })?)
            }
            serde_json::Value::Array(items) => {
                let mut elems = Vec::with_capacity(items.len());
                for item in items {
                    let n = item.as_i64().ok_or_else(|| TraceParseError {
                        message: alloc::format!("input array `{name}` has a non-integer element"),
                    })?;
                    elems.push(n);
                }
                InputValue::Array(elems)
            }
            _ => {
                return Err(TraceParseError {
                    message: alloc::format!("input `{name}` must be an integer or integer array"),
                })
            }
        };
        bindings.insert(name, value);
    }
    Ok(bindings)
}

/// Render input bindings as the canonical JSON object accepted by
/// [`parse_inputs`].
pub fn inputs_to_json(bindings: &InputBindings) -> String {
    let mut map = serde_json::Map::new();
    for (name, value) in bindings {
        let v = match value {
            InputValue::Int(n) => serde_json::Value::from(*n),
            InputValue::Array(elems) => serde_json::Value::Array(
                elems.iter().map(|&e| serde_json::Value::from(e)).collect(),
            ),
        };
        map.insert(name.clone(), v);
    }
    serde_json::Value::Object(map).to_string()
}
