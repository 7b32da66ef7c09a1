//! One report value, two renderings. Human tables and `--json` print the same
//! strings for every number, so the payloads never disagree.

use expsearch::ratio::{self, Rational};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, Default)]
pub struct NumberFormat {
    pub decimals: Option<usize>,
}

impl NumberFormat {
    pub fn q(&self, r: &Rational) -> Value {
        Value::String(ratio::format_rational(r, self.decimals))
    }

    pub fn f(&self, x: f64) -> Value {
        match self.decimals {
            Some(k) => Value::String(format!("{x:.k$}")),
            None => Value::String(format!("{x}")),
        }
    }
}

pub fn render(v: &Value, json: bool) -> String {
    if json {
        let mut s = serde_json::to_string_pretty(v).expect("values serialize");
        s.push('\n');
        return s;
    }
    let mut out = String::new();
    match v {
        Value::Object(m) => object(&mut out, m, 0),
        other => {
            out.push_str(&scalar(other));
            out.push('\n');
        }
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        // step pairs and other inner lists read better without commas
        Value::Array(items) if items.iter().all(|i| !i.is_array()) => items.iter().map(scalar).collect::<Vec<_>>().join(", "),
        Value::Array(items) => items
            .iter()
            .map(|i| match i {
                Value::Array(inner) => inner.iter().map(scalar).collect::<Vec<_>>().join(" "),
                other => scalar(other),
            })
            .collect::<Vec<_>>()
            .join(", "),
        other => other.to_string(),
    }
}

fn is_table(items: &[Value]) -> bool {
    !items.is_empty()
        && items.iter().all(|i| match i {
            Value::Object(m) => m.values().all(|v| !v.is_object()),
            _ => false,
        })
}

fn object(out: &mut String, m: &Map<String, Value>, indent: usize) {
    let pad = " ".repeat(indent);
    for (k, v) in m {
        match v {
            Value::Object(inner) => {
                out.push_str(&format!("{pad}{k}:\n"));
                object(out, inner, indent + 2);
            }
            Value::Array(items) if is_table(items) => {
                out.push_str(&format!("{pad}{k}:\n"));
                table(out, items, indent + 2);
            }
            other => out.push_str(&format!("{pad}{k}: {}\n", scalar(other))),
        }
    }
}

fn table(out: &mut String, rows: &[Value], indent: usize) {
    let pad = " ".repeat(indent);
    let mut cols: Vec<String> = Vec::new();
    for r in rows {
        for k in r.as_object().unwrap().keys() {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let m = r.as_object().unwrap();
            cols.iter().map(|c| m.get(c).map(scalar).unwrap_or_default()).collect()
        })
        .collect();
    let widths: Vec<usize> = cols
        .iter()
        .enumerate()
        .map(|(i, c)| cells.iter().map(|r| r[i].chars().count()).chain([c.chars().count()]).max().unwrap())
        .collect();
    let line = |vals: &[String]| -> String {
        let parts: Vec<String> = vals
            .iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v}{}", " ".repeat(w - v.chars().count())))
            .collect();
        format!("{pad}{}\n", parts.join("  ").trim_end())
    };
    out.push_str(&line(&cols));
    for r in &cells {
        out.push_str(&line(r));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn tables_align_and_json_matches() {
        let v = json!({"value": "10", "rows": [{"point": "A", "time": "15/2"}, {"point": "mid x", "time": "3"}]});
        let human = render(&v, false);
        assert!(human.contains("value: 10"));
        assert!(human.contains("point  time"));
        assert!(human.contains("mid x  3"));
        assert!(render(&v, true).contains("\"15/2\""));
    }
}
