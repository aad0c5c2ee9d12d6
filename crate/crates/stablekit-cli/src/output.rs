//! Canonical JSON text: sorted keys, no whitespace, floats at 17 significant digits.

use serde_json::{Number, Value};
use std::fmt::Write;

pub fn format_f64(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..=16).contains(&e) {
        format!("{:.*}", (16 - e) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

fn number(n: &Number, out: &mut String) {
    if let Some(i) = n.as_i64() {
        write!(out, "{i}").unwrap();
    } else if let Some(u) = n.as_u64() {
        write!(out, "{u}").unwrap();
    } else {
        out.push_str(&format_f64(n.as_f64().unwrap_or(f64::NAN)));
    }
}

fn string(s: &str, out: &mut String) {
    out.push_str(&serde_json::to_string(s).expect("string serialises"));
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => number(n, out),
        Value::String(s) => string(s, out),
        Value::Array(a) => {
            out.push('[');
            for (k, x) in a.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_value(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                string(key, out);
                out.push(':');
                write_value(&m[key], out);
            }
            out.push('}');
        }
    }
}

pub fn canonical(v: &Value) -> String {
    let mut s = String::new();
    write_value(v, &mut s);
    s
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Array(_) | Value::Object(_) => None,
        Value::Number(n) => {
            let mut s = String::new();
            number(n, &mut s);
            Some(s)
        }
        Value::String(s) => Some(s.clone()),
        other => Some(canonical(other)),
    }
}

fn pretty_into(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            for key in keys {
                match scalar(&m[key]) {
                    Some(s) => writeln!(out, "{pad}{key}: {s}").unwrap(),
                    None => {
                        writeln!(out, "{pad}{key}:").unwrap();
                        pretty_into(&m[key], indent + 1, out);
                    }
                }
            }
        }
        Value::Array(a) if a.iter().all(|x| scalar(x).is_some()) => {
            let items: Vec<String> = a.iter().filter_map(scalar).collect();
            writeln!(out, "{pad}[{}]", items.join(", ")).unwrap();
        }
        Value::Array(a) => {
            for (k, x) in a.iter().enumerate() {
                match scalar(x) {
                    Some(s) => writeln!(out, "{pad}- {s}").unwrap(),
                    None => {
                        writeln!(out, "{pad}- [{k}]").unwrap();
                        pretty_into(x, indent + 1, out);
                    }
                }
            }
        }
        other => writeln!(out, "{pad}{}", scalar(other).unwrap_or_default()).unwrap(),
    }
}

/// Indented key/value view of a report.
pub fn pretty(v: &Value) -> String {
    let mut s = String::new();
    pretty_into(v, 0, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_f64(1.5), "1.5000000000000000");
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(-2.5e-9), "-2.5000000000000001e-9");
        assert_eq!(format_f64(f64::NAN), "null");
        for x in [1.0 / 3.0, 123456.789, 6.02e23, -1e-300] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn keys_are_sorted() {
        let v = json!({ "b": 1, "a": [true, null, 0.5], "c": { "z": "s", "y": -3 } });
        assert_eq!(canonical(&v), r#"{"a":[true,null,0.50000000000000000],"b":1,"c":{"y":-3,"z":"s"}}"#);
        assert!(pretty(&v).contains("c:\n  y: -3\n  z: s\n"));
    }
}
