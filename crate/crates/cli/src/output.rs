//! Line-oriented `key value` reports, or one JSON object with `--format json`.

use std::fmt::Write;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone)]
enum Entry {
    Int(u64),
    Num(f64),
    Text(String),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    entries: Vec<(String, Entry)>,
    /// Set when a property or cross-route check failed (exit code 1).
    pub failed: bool,
}

impl Report {
    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.entries.push((key.into(), Entry::Num(value)));
    }

    pub fn int(&mut self, key: impl Into<String>, value: usize) {
        self.entries.push((key.into(), Entry::Int(value as u64)));
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), Entry::Text(value.into())));
    }

    pub fn list(&mut self, key: impl Into<String>, values: &[f64]) {
        self.entries
            .push((key.into(), Entry::List(values.to_vec())));
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, e)| render_entry(e))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut out = String::new();
                for (key, entry) in &self.entries {
                    let _ = writeln!(out, "{key} {}", render_entry(entry));
                }
                out
            }
            Format::Json => {
                let mut map = Map::new();
                for (key, entry) in &self.entries {
                    let value = match entry {
                        Entry::Int(v) => Value::from(*v),
                        Entry::Num(v) => json_number(*v),
                        Entry::Text(s) => Value::String(s.clone()),
                        Entry::List(vs) => {
                            Value::Array(vs.iter().map(|v| json_number(*v)).collect())
                        }
                    };
                    map.insert(key.clone(), value);
                }
                let mut text =
                    serde_json::to_string_pretty(&Value::Object(map)).expect("report serializes");
                text.push('\n');
                text
            }
        }
    }
}

fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(v.to_string()))
}

/// Shortest round-trip digits, in exponent form outside `[1e-4, 1e15)`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn render_entry(entry: &Entry) -> String {
    match entry {
        Entry::Int(v) => v.to_string(),
        Entry::Num(v) => format_f64(*v),
        Entry::Text(s) => s.clone(),
        Entry::List(vs) => vs
            .iter()
            .map(|v| format_f64(*v))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_agree() {
        let mut r = Report::default();
        r.num("value", 0.25);
        r.list("theta", &[0.5, 1.0]);
        r.text("result", "pass");
        assert_eq!(
            r.render(Format::Text),
            "value 0.25\ntheta 0.5 1\nresult pass\n"
        );
        let v: Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(v["theta"][1], 1.0);
        assert_eq!(r.get("result").as_deref(), Some("pass"));
    }

    #[test]
    fn small_values_use_exponents() {
        assert_eq!(format_f64(6.25e-17), "6.25e-17");
        assert_eq!(format_f64(0.0), "0");
        assert_eq!(format_f64(-1.5), "-1.5");
        assert_eq!(format_f64(1e-17).parse::<f64>().unwrap(), 1e-17);
    }
}
