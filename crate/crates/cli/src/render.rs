use serde_json::Value;

use crate::args::Format;

/// A flat table for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

impl Table {
    pub fn from_records(records: &Value, columns: &[&str]) -> Table {
        let rows = records
            .as_array()
            .map(|rs| rs.iter().map(|r| columns.iter().map(|c| cell(&r[*c])).collect()).collect())
            .unwrap_or_default();
        Table {
            headers: columns.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    fn key_value(pairs: Vec<(String, String)>) -> Table {
        Table {
            headers: vec!["field".into(), "value".into()],
            rows: pairs.into_iter().map(|(k, v)| vec![k, v]).collect(),
        }
    }
}

/// Dotted-path scalars of `v`; long arrays are summarised by their length.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&key(k), child, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) && items.len() <= 16 => {
            out.push((prefix.to_string(), cell(v)));
        }
        Value::Array(items) => out.push((prefix.to_string(), format!("[{} items]", items.len()))),
        other => out.push((prefix.to_string(), cell(other))),
    }
}

fn csv_string(t: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.headers).expect("in-memory write");
    for r in &t.rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

pub fn render(doc: &Value, table: Option<&Table>, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(doc).expect("serializable") + "\n",
        Format::Csv => {
            if let Some(t) = table {
                return csv_string(t);
            }
            let mut pairs = vec![];
            let body = if doc["status"] == "error" { &doc["error"] } else { &doc["result"] };
            flatten("", body, &mut pairs);
            csv_string(&Table::key_value(pairs))
        }
        Format::Text => {
            let mut out = format!(
                "{} {}: {}\n",
                doc["tool"].as_str().unwrap_or("luroth-dim"),
                doc["config"]["command"]["subcommand"].as_str().unwrap_or("?"),
                doc["status"].as_str().unwrap_or("?")
            );
            let mut pairs = vec![];
            let body = if doc["status"] == "error" { &doc["error"] } else { &doc["result"] };
            flatten("", body, &mut pairs);
            for (k, v) in pairs {
                out.push_str(&format!("  {k}: {v}\n"));
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn records_become_rows() {
        let t = Table::from_records(&json!([{"n": 1, "d": [3, 2]}, {"n": 2, "d": "x,y"}]), &["n", "d"]);
        assert_eq!(csv_string(&t), "n,d\n1,3 2\n2,\"x,y\"\n");
    }

    #[test]
    fn flatten_summarises_long_arrays() {
        let mut out = vec![];
        flatten("", &json!({"a": {"b": 1}, "c": (0..20).collect::<Vec<_>>(), "d": [1, 2]}), &mut out);
        assert_eq!(
            out,
            vec![
                ("a.b".to_string(), "1".to_string()),
                ("c".to_string(), "[20 items]".to_string()),
                ("d".to_string(), "1 2".to_string())
            ]
        );
    }
}
