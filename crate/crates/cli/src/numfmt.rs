//! Fixed-precision float formatting shared by every emitted file.
//!
//! All user-visible numbers carry six significant digits: plain decimal
//! notation for magnitudes from 1e-4 up to 1e6, scientific notation
//! outside that window. Because the text depends only on the value,
//! reruns that compute bitwise-equal numbers emit byte-identical files.

use serde_json::Value;

/// Formats with six significant digits.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}

/// Rounds to the value the six-digit text parses back to.
pub fn sig6(v: f64) -> f64 {
    fmt_sig(v).parse().expect("fmt_sig emits valid floats")
}

/// Rounds every fractional number in a JSON tree to six significant
/// digits; integers pass through untouched.
pub fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if !n.is_i64() && !n.is_u64() {
                if let Some(f) = n.as_f64() {
                    if let Some(r) = serde_json::Number::from_f64(sig6(f)) {
                        *v = Value::Number(r);
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}
