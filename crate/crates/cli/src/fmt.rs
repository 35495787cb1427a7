//! Deterministic text formatting for command output.
//!
//! Every floating-point value leaving the binary goes through [`float17`]:
//! scientific notation with 17 significant digits, which round-trips any
//! `f64` exactly (`f64` has at most 17 significant decimal digits). Output
//! is assembled into a `String` and written in one call, so identical
//! invocations produce byte-identical files regardless of thread count.

use std::fmt::Write as _;

/// Render a float with 17 significant digits (`{:.16e}`), round-trip safe.
///
/// Non-finite values become JSON-friendly `null`; they never appear in CSV
/// columns (commands fail with a numerical error before emitting them).
pub fn float17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// One `key: value` line of a hand-assembled JSON object.
pub enum Field<'a> {
    Uint(&'a str, u64),
    Float(&'a str, f64),
    /// `None` renders as `null`.
    OptFloat(&'a str, Option<f64>),
    Bool(&'a str, bool),
    Str(&'a str, &'a str),
    /// Pre-rendered JSON (arrays, nested objects); inserted verbatim.
    Raw(&'a str, String),
}

/// Assemble a JSON object with two-space indentation and fields in the
/// given order. Keys are written as-is (callers use plain identifiers or
/// single letters, never characters needing escapes).
pub fn json_object(indent: usize, fields: &[Field<'_>]) -> String {
    let pad = "  ".repeat(indent + 1);
    let close = "  ".repeat(indent);
    let mut out = String::from("{\n");
    for (i, field) in fields.iter().enumerate() {
        let comma = if i + 1 == fields.len() { "" } else { "," };
        match field {
            Field::Uint(k, v) => _ = writeln!(out, "{pad}\"{k}\": {v}{comma}"),
            Field::Float(k, v) => _ = writeln!(out, "{pad}\"{k}\": {}{comma}", float17(*v)),
            Field::OptFloat(k, v) => {
                let text = v.map_or_else(|| "null".to_string(), float17);
                _ = writeln!(out, "{pad}\"{k}\": {text}{comma}");
            }
            Field::Bool(k, v) => _ = writeln!(out, "{pad}\"{k}\": {v}{comma}"),
            Field::Str(k, v) => _ = writeln!(out, "{pad}\"{k}\": \"{v}\"{comma}"),
            Field::Raw(k, v) => _ = writeln!(out, "{pad}\"{k}\": {v}{comma}"),
        }
    }
    out.push_str(&close);
    out.push('}');
    out
}

/// Render a float slice as a one-line JSON array.
pub fn json_float_array(xs: &[f64]) -> String {
    let mut out = String::from("[");
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&float17(*x));
    }
    out.push(']');
    out
}

/// Append one CSV row of preformatted cells.
pub fn csv_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}
