//! Serialization of results with a fixed number of significant digits, so
//! files are byte-stable and values survive a write/read round trip.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::montecarlo::SweepResult;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits. Non-finite values pass through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Rounded and printed in shortest round-trip form, as in the JSON output.
pub fn format_number(x: f64) -> String {
    match serde_json::Number::from_f64(round_sig(x)) {
        Some(n) => n.to_string(),
        None => x.to_string(),
    }
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

/// Pretty JSON with every float rounded, terminated by a newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    let mut s =
        serde_json::to_string_pretty(&round_value(v)).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// `x,mean,stderr` CSV with LF line endings.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("x,mean,stderr\n");
    for p in &result.points {
        out.push_str(&format!(
            "{},{},{}\n",
            format_number(p.x),
            format_number(p.mean),
            format_number(p.stderr)
        ));
    }
    out
}

/// Two-column `quantity,value` CSV.
pub fn key_value_csv(header: &str, rows: &[(String, f64)]) -> String {
    let mut out = format!("quantity,{header}\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{}\n", format_number(*v)));
    }
    out
}
