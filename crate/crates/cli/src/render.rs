use serde_json::Value;

use crate::commands::Outcome;
use crate::Format;

pub fn render(o: &Outcome, format: Format) -> Result<String, Box<dyn std::error::Error>> {
    match format {
        Format::Json => Ok(json(o)),
        Format::Csv => csv(o),
        Format::Text => Ok(text(o)),
    }
}

fn json(o: &Outcome) -> String {
    epiter::report::to_json(&o.command, &o.params, &o.result)
}

fn csv(o: &Outcome) -> Result<String, Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&o.table.header)?;
    for row in &o.table.rows {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// One `path: value` line per JSON leaf, read back from the JSON report.
fn text(o: &Outcome) -> String {
    let report: Value = serde_json::from_str(&json(o)).expect("own output parses");
    let mut out = String::new();
    flatten("", &report, &mut out);
    out
}

fn flatten(path: &str, v: &Value, out: &mut String) {
    let join = |key: &str| if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, v) in map {
                flatten(&join(k), v, out);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{path}[{i}]"), v, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{path}: {s}\n")),
        other => out.push_str(&format!("{path}: {other}\n")),
    }
}
