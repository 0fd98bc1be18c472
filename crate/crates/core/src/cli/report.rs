//! Deterministic JSON: keys sorted, every float written with 17 significant
//! digits so that reports round-trip exactly and diff cleanly.

use serde::Serialize;
use serde_json::{Number, Value};

pub const SCHEMA_VERSION: &str = "1.0.0";

/// `x` in scientific notation with 17 significant digits and a signed
/// exponent, e.g. `-1.1250000000000000e+0`.
pub fn format_float(x: f64) -> String {
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

fn normalize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("finite float");
            *n = format_float(x).parse::<Number>().expect("valid JSON number");
        }
        Value::Array(items) => items.iter_mut().for_each(normalize),
        Value::Object(map) => map.values_mut().for_each(normalize),
        _ => {}
    }
}

pub fn to_value<T: Serialize>(report: &T) -> Value {
    let mut v = serde_json::to_value(report).expect("reports serialize");
    normalize(&mut v);
    v
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(report)).expect("reports serialize");
    s.push('\n');
    s
}
