//! JSON batch files.
//!
//! Two shapes are accepted:
//!
//! ```json
//! { "n_qubits": 1, "states": [[[1, 0], [0, 0]], [[0.7071, 0], [0.7071, 0]]] }
//! { "patterns": [[1, -1, 1, 1], [-1, -1, 1, -1]] }
//! ```
//!
//! A state is a list of `[re, im]` pairs; `states` may also be a single flat
//! state. States within `1e-6` of unit norm are renormalized. Patterns are
//! amplitude-encoded; `"lenient": true` admits arbitrary real rows. An optional
//! `"t_data"` records the preparation time of one state.

use serde::Serialize;
use serde_json::{json, Value};

use crate::bcqse::TrainingBatch;
use crate::error::{Error, Result};
use crate::hebbian::PatternSet;
use crate::qcore::{c64, StateVector, C64};

const NORM_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchFile {
    pub batch: TrainingBatch,
    pub patterns: Option<PatternSet>,
    pub t_data: Option<f64>,
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("batch file field `{field}`: {msg}"))
}

fn number(v: &Value, field: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| field_err(field, format!("expected a number, found {v}")))
}

fn parse_state(v: &Value, field: &str, n_qubits: Option<u64>) -> Result<StateVector> {
    let pairs = v.as_array().ok_or_else(|| field_err(field, "expected a list of [re, im] pairs"))?;
    let amps = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let f = format!("{field}[{i}]");
            match p.as_array().map(Vec::as_slice) {
                Some([re, im]) => Ok(c64(number(re, &f)?, number(im, &f)?)),
                _ => Err(field_err(&f, "expected [re, im]")),
            }
        })
        .collect::<Result<Vec<C64>>>()?;
    if let Some(n) = n_qubits {
        if amps.len() as u64 != 1u64 << n.min(63) {
            return Err(field_err(field, format!("has {} amplitudes, n_qubits = {n} needs {}", amps.len(), 1u64 << n.min(63))));
        }
    }
    let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > NORM_SLACK {
        return Err(field_err(field, format!("state is not normalized (sum |a|^2 = {norm2})")));
    }
    StateVector::normalized(amps).map_err(|e| field_err(field, e))
}

fn parse_patterns(v: &Value, lenient: bool) -> Result<PatternSet> {
    let rows = v.as_array().ok_or_else(|| field_err("patterns", "expected a list of lists"))?;
    let rows = rows
        .iter()
        .enumerate()
        .map(|(m, row)| {
            let f = format!("patterns[{m}]");
            row.as_array()
                .ok_or_else(|| field_err(&f, "expected a list of numbers"))?
                .iter()
                .enumerate()
                .map(|(i, x)| number(x, &format!("{f}[{i}]")))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if lenient {
        PatternSet::lenient(rows)
    } else {
        PatternSet::new(rows)
    }
}

pub fn parse_batch_json(text: &str) -> Result<BatchFile> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    let obj = root.as_object().ok_or_else(|| Error::InvalidArgument("batch file must be a JSON object".into()))?;
    let t_data = obj.get("t_data").map(|v| number(v, "t_data")).transpose()?;
    if let Some(p) = obj.get("patterns") {
        let lenient = obj.get("lenient").and_then(Value::as_bool).unwrap_or(false);
        let patterns = parse_patterns(p, lenient)?;
        return Ok(BatchFile { batch: patterns.encode()?, patterns: Some(patterns), t_data });
    }
    let states = obj.get("states").ok_or_else(|| Error::InvalidArgument("batch file needs `states` or `patterns`".into()))?;
    let n_qubits = obj
        .get("n_qubits")
        .map(|v| v.as_u64().ok_or_else(|| field_err("n_qubits", "expected a non-negative integer")))
        .transpose()?;
    let list = states.as_array().ok_or_else(|| field_err("states", "expected a list"))?;
    let flat = list.first().and_then(|p| p.as_array()).and_then(|p| p.first()).is_some_and(Value::is_number);
    let parsed = if flat {
        vec![parse_state(states, "states", n_qubits)?]
    } else {
        list.iter()
            .enumerate()
            .map(|(m, s)| parse_state(s, &format!("states[{m}]"), n_qubits))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(BatchFile { batch: TrainingBatch::new(parsed)?, patterns: None, t_data })
}

#[derive(Serialize)]
struct StatesFile {
    n_qubits: usize,
    states: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_data: Option<f64>,
}

/// The `states` shape, pretty-printed.
pub fn batch_to_json(batch: &TrainingBatch, t_data: Option<f64>) -> String {
    let file = StatesFile {
        n_qubits: batch.n_qubits(),
        states: batch.states().iter().map(|s| s.amplitudes().iter().map(|a| [a.re, a.im]).collect()).collect(),
        t_data,
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

/// The `patterns` shape.
pub fn patterns_to_json(p: &PatternSet) -> String {
    serde_json::to_string_pretty(&json!({ "patterns": p.patterns() })).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn states_round_trip() {
        let text = r#"{"n_qubits": 1, "states": [[[1, 0], [0, 0]], [[0.70710678, 0], [0, 0.70710678]]], "t_data": 2.5}"#;
        let f = parse_batch_json(text).unwrap();
        assert_eq!(f.batch.m(), 2);
        assert_eq!(f.t_data, Some(2.5));
        let again = parse_batch_json(&batch_to_json(&f.batch, f.t_data)).unwrap();
        assert_eq!(again.batch, f.batch);
    }

    #[test]
    fn flat_single_state() {
        let f = parse_batch_json(r#"{"n_qubits": 1, "states": [[0, 0], [1, 0]]}"#).unwrap();
        assert_eq!(f.batch.m(), 1);
    }

    #[test]
    fn patterns_are_encoded() {
        let f = parse_batch_json(r#"{"patterns": [[1, -1], [1, 1]]}"#).unwrap();
        assert_eq!(f.batch.n_qubits(), 1);
        assert!(f.patterns.unwrap().is_binary());
        assert!(parse_batch_json(r#"{"patterns": [[2, 1]], "lenient": true}"#).is_ok());
    }

    #[test]
    fn diagnostics_name_the_field() {
        let e = parse_batch_json(r#"{"n_qubits": 1, "states": [[[1, 0], [0]]]}"#).unwrap_err();
        assert!(e.to_string().contains("states[0][1]"), "{e}");
        let e = parse_batch_json(r#"{"n_qubits": 2, "states": [[[1, 0], [0, 0]]]}"#).unwrap_err();
        assert!(e.to_string().contains("n_qubits = 2"), "{e}");
        assert_eq!(parse_batch_json(r#"{"patterns": []}"#).unwrap_err(), Error::EmptyBatch);
        assert!(matches!(parse_batch_json("{"), Err(Error::Parse { .. })));
        assert!(matches!(parse_batch_json(r#"{"patterns": [[1, 0.5]]}"#), Err(Error::InvalidPattern(_))));
    }
}
