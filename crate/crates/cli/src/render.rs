//! Plain-text rendering of JSON reports.

use serde_json::Value;

const INLINE_WIDTH: usize = 72;

pub fn render(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out
}

/// One-line form of `value`, unless it is long or an object holding
/// further containers.
fn inline(value: &Value) -> Option<String> {
    if let Value::Object(m) = value {
        if m.values().any(|x| x.is_object() || x.is_array()) {
            return None;
        }
    }
    let text = match value {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    (text.len() <= INLINE_WIDTH).then_some(text)
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match inline(v) {
                    Some(text) => out.push_str(&format!("{pad}{k}: {text}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_value(v, indent + 2, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match inline(item) {
                    Some(text) => out.push_str(&format!("{pad}- {text}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        write_value(item, indent + 2, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", inline(other).unwrap_or_else(|| other.to_string()))),
    }
}
