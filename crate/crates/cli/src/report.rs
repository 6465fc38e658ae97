//! JSON emission with a fixed float format.
//!
//! Reports print every real with 12 significant digits. Instance and
//! measurement files use the shortest exact representation instead so they
//! read back bit for bit.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use serde_json::{Number, Value};

use crate::CliError;

pub const REPORT_FORMAT: &str = "udisc-report/1";

/// A real that refuses to serialize unless finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            Err(serde::ser::Error::custom(format!("non-finite value {}", self.0)))
        }
    }
}

pub fn reals(xs: &[f64]) -> Vec<Real> {
    xs.iter().copied().map(Real).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloatStyle {
    /// 12 significant digits.
    Report,
    /// Shortest round-trip representation.
    Exact,
}

/// `x` with 12 significant digits: fixed notation for moderate magnitudes,
/// scientific otherwise.
pub fn format_real(x: f64) -> String {
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if x != 0.0 && !(-4..12).contains(&exp) {
        sci
    } else {
        format!("{:.*}", (11 - exp).max(0) as usize, x)
    }
}

fn format_number(n: &Number, style: FloatStyle) -> String {
    if n.is_f64() && style == FloatStyle::Report {
        format_real(n.as_f64().unwrap())
    } else {
        n.to_string()
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(out: &mut String, v: &Value, indent: usize, style: FloatStyle) {
    let pad = |out: &mut String, k: usize| out.push_str(&"  ".repeat(k));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&format_number(n, style)),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(out, item, indent, style);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1, style);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                let _ = write!(out, "{}: ", Value::String(key.clone()));
                write_value(out, item, indent + 1, style);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

pub fn emit_value(v: &Value, style: FloatStyle) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0, style);
    out.push('\n');
    out
}

/// Serializes `x` and renders it. Non-finite reals are refused here, before
/// any text is produced.
pub fn emit<T: Serialize>(x: &T, style: FloatStyle) -> Result<String, CliError> {
    let v = serde_json::to_value(x).map_err(|e| CliError::Solver(format!("cannot emit report: {e}")))?;
    Ok(emit_value(&v, style))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn half_has_twelve_digits() {
        assert_eq!(format_real(0.5), "0.500000000000");
        assert_eq!(format_real(1.0), "1.00000000000");
        assert_eq!(format_real(0.0), "0.00000000000");
        assert_eq!(format_real(-123.456), "-123.456000000");
        assert_eq!(format_real(2.5e-7), "2.50000000000e-7");
        assert_eq!(format_real(3e13), "3.00000000000e13");
        assert_eq!(format_real(9.9999999999996), "10.0000000000");
    }

    #[test]
    fn nan_is_refused() {
        #[derive(Serialize)]
        struct R {
            p: Real,
        }
        assert!(emit(&R { p: Real(f64::NAN) }, FloatStyle::Report).is_err());
        assert!(emit(&vec![Real(1.0), Real(f64::INFINITY)], FloatStyle::Report).is_err());
        assert!(emit(&R { p: Real(0.25) }, FloatStyle::Report).is_ok());
    }

    #[test]
    fn integers_stay_integers() {
        let text = emit_value(&json!({"n": 3, "x": 3.0, "v": [1, 2]}), FloatStyle::Report);
        assert_eq!(text, "{\n  \"n\": 3,\n  \"x\": 3.00000000000,\n  \"v\": [1, 2]\n}\n");
    }

    #[test]
    fn field_order_is_kept() {
        let text = emit_value(&json!({"z": 1, "a": 2, "m": 3}), FloatStyle::Report);
        let z = text.find("\"z\"").unwrap();
        let a = text.find("\"a\"").unwrap();
        assert!(z < a && a < text.find("\"m\"").unwrap());
    }

    #[test]
    fn exact_style_round_trips_bits() {
        let v = json!([0.1 + 0.2, 1.0 / 3.0, -2.5e-300]);
        let back: Value = serde_json::from_str(&emit_value(&v, FloatStyle::Exact)).unwrap();
        assert_eq!(back, v);
    }
}
