//! Readers for point clouds and metrics.
//!
//! * cloud CSV: one point per row, numeric columns are coordinates; an optional
//!   first column holds ids (detected from a header named `id`/`name`/`label`, or
//!   from a non-numeric first field).
//! * cloud JSON: `{"points":[{"id":..,"coords":[..]}], "metric":{"kind":..}}`
//! * graph JSON: `{"edges":[[i,j,w],...], "n": optional}`
//! * metric JSON: `{"kind":"precomputed","table":[[..]]}` and friends
//! * table CSV: an n×n block of distances

use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use super::{MetricKind, MetricSpace, Point, PointCloud};

/// Malformed input, located by file and (when known) line.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{file}{}: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
pub struct LoadError {
    pub file: String,
    pub line: Option<usize>,
    pub message: String,
}

impl LoadError {
    pub fn new(source: impl Into<String>, line: Option<usize>, message: impl Into<String>) -> Self {
        Self { file: source.into(), line, message: message.into() }
    }

    fn json(source: &str, err: serde_json::Error) -> Self {
        Self::new(source, Some(err.line()), err.to_string())
    }
}

pub fn read_to_string(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|e| LoadError::new(path.display().to_string(), None, e.to_string()))
}

fn is_numeric(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

fn csv_records(text: &str, source: &str) -> Result<Vec<(usize, Vec<String>)>, LoadError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            LoadError::new(source, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(out)
}

fn parse_reals(fields: &[String], source: &str, line: usize) -> Result<Vec<f64>, LoadError> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| LoadError::new(source, Some(line), format!("expected a finite real, got {f:?}")))
        })
        .collect()
}

pub fn parse_cloud_csv(text: &str, source: &str) -> Result<PointCloud, LoadError> {
    let mut records = csv_records(text, source)?;
    if records.is_empty() {
        return Err(LoadError::new(source, None, "no points"));
    }
    let first = &records[0].1;
    let id_header = matches!(first[0].to_ascii_lowercase().as_str(), "id" | "name" | "label");
    let header = id_header
        || first.iter().skip(1).any(|f| !is_numeric(f))
        || (!is_numeric(&first[0]) && records.get(1).is_some_and(|(_, r)| is_numeric(&r[0])));
    let has_id = if header {
        let had = id_header;
        records.remove(0);
        had
    } else {
        !is_numeric(&first[0])
    };
    if records.is_empty() {
        return Err(LoadError::new(source, None, "header but no points"));
    }

    let mut points = Vec::with_capacity(records.len());
    let mut width = None;
    for (row, (line, fields)) in records.iter().enumerate() {
        let (id, coord_fields) = if has_id {
            (fields[0].clone(), &fields[1..])
        } else {
            (row.to_string(), &fields[..])
        };
        match width {
            None => width = Some(coord_fields.len()),
            Some(w) if w != coord_fields.len() => {
                return Err(LoadError::new(
                    source,
                    Some(*line),
                    format!("expected {w} coordinates, found {}", coord_fields.len()),
                ))
            }
            _ => {}
        }
        let coords = if coord_fields.is_empty() {
            None
        } else {
            Some(parse_reals(coord_fields, source, *line)?)
        };
        points.push(Point::new(id, coords));
    }
    PointCloud::new(points).map_err(|e| LoadError::new(source, None, e.to_string()))
}

#[derive(Deserialize)]
struct CloudFile {
    points: Vec<RawPoint>,
    #[serde(default)]
    metric: Option<MetricKind>,
}

#[derive(Deserialize)]
struct RawPoint {
    #[serde(default)]
    id: Option<Value>,
    #[serde(default)]
    coords: Option<Vec<f64>>,
}

fn id_string(v: Value) -> String {
    match v {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

pub fn parse_cloud_json(text: &str, source: &str) -> Result<(PointCloud, Option<MetricKind>), LoadError> {
    let file: CloudFile = serde_json::from_str(text).map_err(|e| LoadError::json(source, e))?;
    let points = file
        .points
        .into_iter()
        .enumerate()
        .map(|(i, p)| Point::new(p.id.map(id_string).unwrap_or_else(|| i.to_string()), p.coords))
        .collect();
    let cloud = PointCloud::new(points).map_err(|e| LoadError::new(source, None, e.to_string()))?;
    Ok((cloud, file.metric))
}

#[derive(Deserialize)]
struct EdgeFile {
    edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    n: Option<usize>,
}

/// A metric read from a file, with the point count it implies (if any).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFile {
    pub kind: MetricKind,
    pub implied_len: Option<usize>,
}

/// Graph edge list or tagged metric JSON.
pub fn parse_metric_json(text: &str, source: &str) -> Result<MetricFile, LoadError> {
    let value: Value = serde_json::from_str(text).map_err(|e| LoadError::json(source, e))?;
    if value.get("kind").is_some() {
        let kind: MetricKind = serde_json::from_value(value).map_err(|e| LoadError::json(source, e))?;
        let implied_len = match &kind {
            MetricKind::Precomputed { table } => Some(table.len()),
            MetricKind::GraphShortestPath { edges } => edges.iter().map(|e| e.0.max(e.1) + 1).max(),
            _ => None,
        };
        return Ok(MetricFile { kind, implied_len });
    }
    let file: EdgeFile = serde_json::from_value(value).map_err(|e| LoadError::json(source, e))?;
    let implied_len = file.n.or_else(|| file.edges.iter().map(|e| e.0.max(e.1) + 1).max());
    Ok(MetricFile { kind: MetricKind::GraphShortestPath { edges: file.edges }, implied_len })
}

pub fn parse_table_csv(text: &str, source: &str) -> Result<Vec<Vec<f64>>, LoadError> {
    let records = csv_records(text, source)?;
    let n = records.len();
    records
        .into_iter()
        .map(|(line, fields)| {
            if fields.len() != n {
                return Err(LoadError::new(
                    source,
                    Some(line),
                    format!("table row has {} entries, expected {n}", fields.len()),
                ));
            }
            parse_reals(&fields, source, line)
        })
        .collect()
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Cloud from a `.json` or CSV file, plus any metric embedded in the JSON.
pub fn load_cloud(path: &Path) -> Result<(PointCloud, Option<MetricKind>), LoadError> {
    let text = read_to_string(path)?;
    let source = path.display().to_string();
    if is_json(path) {
        parse_cloud_json(&text, &source)
    } else {
        parse_cloud_csv(&text, &source).map(|c| (c, None))
    }
}

/// `--metric` accepts a kind name or a path (JSON metric/edge list, CSV table).
pub fn load_metric(arg: &str) -> Result<MetricFile, LoadError> {
    let simple = |kind| Ok(MetricFile { kind, implied_len: None });
    match arg {
        "euclidean" => simple(MetricKind::Euclidean),
        "manhattan" => simple(MetricKind::Manhattan),
        "chebyshev" => simple(MetricKind::Chebyshev),
        "discrete" => simple(MetricKind::Discrete),
        path => {
            let path = Path::new(path);
            let text = read_to_string(path)?;
            let source = path.display().to_string();
            if is_json(path) {
                parse_metric_json(&text, &source)
            } else {
                let table = parse_table_csv(&text, &source)?;
                Ok(MetricFile { implied_len: Some(table.len()), kind: MetricKind::Precomputed { table } })
            }
        }
    }
}

/// Assemble a space from an optional cloud file and an optional metric argument.
/// Without a cloud, the metric file must imply the point count.
pub fn load_space(cloud: Option<&Path>, metric: Option<&str>) -> Result<MetricSpace, LoadError> {
    let (cloud, embedded, cloud_source) = match cloud {
        Some(p) => {
            let (c, m) = load_cloud(p)?;
            (Some(c), m, p.display().to_string())
        }
        None => (None, None, String::from("<no cloud>")),
    };
    let (kind, implied_len, source) = match metric {
        Some(arg) => {
            let f = load_metric(arg)?;
            (f.kind, f.implied_len, arg.to_string())
        }
        None => (embedded.unwrap_or(MetricKind::Euclidean), None, cloud_source.clone()),
    };
    let cloud = match cloud {
        Some(c) => c,
        None => {
            let n = implied_len
                .ok_or_else(|| LoadError::new(&source, None, "no cloud given and the metric does not imply a size"))?;
            PointCloud::anonymous(n).map_err(|e| LoadError::new(&source, None, e.to_string()))?
        }
    };
    MetricSpace::new(cloud, kind).map_err(|e| LoadError::new(source, None, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_plain_coordinates() {
        let c = parse_cloud_csv("0,0\n3,4\n", "c.csv").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.coords(1), Some(&[3.0, 4.0][..]));
        assert_eq!(c.id(1), "1");
    }

    #[test]
    fn csv_header_and_ids() {
        let c = parse_cloud_csv("id,x,y\na,0,0\nb,1,2\n", "c.csv").unwrap();
        assert_eq!(c.id(1), "b");
        assert_eq!(c.dim(), Some(2));
        let c = parse_cloud_csv("p,0.5\nq,1.5\n", "c.csv").unwrap();
        assert_eq!(c.id(0), "p");
        let c = parse_cloud_csv("x\n0.1\n0.2\n", "c.csv").unwrap();
        assert_eq!(c.len(), 2);
        let c = parse_cloud_csv("x,y\n0.1,1\n0.2,1\n", "c.csv").unwrap();
        assert_eq!(c.coords(0), Some(&[0.1, 1.0][..]));
    }

    #[test]
    fn csv_ids_only() {
        let c = parse_cloud_csv("id\na\nb\nc\n", "c.csv").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.dim(), None);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err = parse_cloud_csv("0,0\n1,oops\n", "bad.csv").unwrap_err();
        assert_eq!((err.file.as_str(), err.line), ("bad.csv", Some(2)));
        let err = parse_cloud_csv("0,0\n1,2\n3\n", "bad.csv").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.to_string().starts_with("bad.csv:3:"));
    }

    #[test]
    fn json_cloud_with_metric() {
        let text = r#"{"points":[{"id":1,"coords":[0.0]},{"id":"b","coords":[2.0]}],"metric":{"kind":"manhattan"}}"#;
        let (c, m) = parse_cloud_json(text, "c.json").unwrap();
        assert_eq!(c.id(0), "1");
        assert_eq!(m, Some(MetricKind::Manhattan));
        let err = parse_cloud_json("{\n\"points\": [\n{\"coords\": [\"x\"]}]}", "c.json").unwrap_err();
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn edge_list_json() {
        let f = parse_metric_json(r#"{"edges":[[0,1,1.0],[1,2,0.5]]}"#, "g.json").unwrap();
        assert_eq!(f.implied_len, Some(3));
        assert!(matches!(f.kind, MetricKind::GraphShortestPath { .. }));
        let f = parse_metric_json(r#"{"kind":"precomputed","table":[[0,1],[1,0]]}"#, "m.json").unwrap();
        assert_eq!(f.implied_len, Some(2));
    }

    #[test]
    fn table_csv() {
        let t = parse_table_csv("0,1,2\n1,0,1\n2,1,0\n", "t.csv").unwrap();
        assert_eq!(t[2][0], 2.0);
        let err = parse_table_csv("0,1\n1,0,3\n", "t.csv").unwrap_err();
        assert_eq!(err.line, Some(2));
    }
}
