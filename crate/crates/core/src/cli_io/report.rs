use std::fmt::Write;

use serde_json::Value;

/// One CSV row per `(k, function)` from a sweep report, or from the `sweep`
/// section of a run report. Rows are ordered by `k`, then function index.
pub fn flatten_report_csv(report: &Value) -> Result<String, String> {
    let sweep = report.get("sweep").unwrap_or(report);
    let scales = sweep
        .get("scales")
        .and_then(Value::as_array)
        .ok_or_else(|| String::from("report has no \"scales\" array"))?;
    let mut rows: Vec<(u64, u64, String)> = Vec::new();
    for scale in scales {
        let num = |v: &Value, key: &str| v.get(key).cloned().unwrap_or(Value::Null);
        let k = scale.get("k").and_then(Value::as_u64).ok_or("scale without k")?;
        let functions = scale.get("functions").and_then(Value::as_array).ok_or("scale without functions")?;
        for f in functions {
            let index = f.get("index").and_then(Value::as_u64).ok_or("function without index")?;
            let name = f.get("name").and_then(Value::as_str).unwrap_or("");
            let row = format!(
                "{k},{},{},{index},{},{},{},{}",
                num(scale, "support_radius"),
                num(scale, "net_size"),
                csv_field(name),
                num(f, "error"),
                num(f, "bound"),
                num(f, "ok"),
            );
            rows.push((k, index, row));
        }
    }
    rows.sort_by_key(|r| (r.0, r.1));
    let mut out = String::from("k,support_radius,net_size,function_index,function,error,bound,ok\n");
    for (_, _, row) in rows {
        let _ = writeln!(out, "{row}");
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
