use serde_json::Value;

use crate::config::Format;

/// A finished verb: the report and whether every requested check passed.
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
    /// Verb-specific CSV, used instead of the flattened report when present.
    pub csv: Option<String>,
}

impl Outcome {
    pub fn new(report: Value, passed: bool) -> Self {
        Self {
            report,
            passed,
            csv: None,
        }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn render(outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&outcome.report).expect("values serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            if let Some(csv) = &outcome.csv {
                return csv.clone();
            }
            let mut rows = Vec::new();
            flatten("", &outcome.report, &mut rows);
            let mut s = String::from("key,value\n");
            for (k, v) in rows {
                s.push_str(&format!("{},{}\n", csv_field(&k), csv_field(&v)));
            }
            s
        }
        Format::Table => {
            let mut rows = Vec::new();
            flatten("", &outcome.report, &mut rows);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            rows.iter()
                .map(|(k, v)| format!("{k:<width$}  {v}\n"))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_flattens_and_quotes() {
        let o = Outcome::new(json!({"a": {"b": [1, "x,y"]}, "c": true}), true);
        assert_eq!(render(&o, Format::Csv), "key,value\na.b[0],1\na.b[1],\"x,y\"\nc,true\n");
    }

    #[test]
    fn table_aligns_keys() {
        let o = Outcome::new(json!({"long_key": 1, "k": 2}), true);
        assert_eq!(render(&o, Format::Table), "k         2\nlong_key  1\n");
    }
}
