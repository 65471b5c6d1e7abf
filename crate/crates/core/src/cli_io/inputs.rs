use std::path::Path;

use serde_json::Value;

use super::config::FamilySource;
use super::{CliError, SubsetSelector};
use crate::function::{FamilyMember, FunctionOnM};
use crate::metric_space::load::{read_to_string, LoadError};
use crate::metric_space::{CompactSubset, MetricSpace};

/// `[spec, ...]` or `{"family": [spec, ...]}`.
pub fn parse_family_json(text: &str, source: &str) -> Result<Vec<FamilyMember>, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| LoadError::new(source, Some(e.line()), e.to_string()))?;
    let specs = match &value {
        Value::Array(items) => items,
        Value::Object(obj) => obj
            .get("family")
            .and_then(Value::as_array)
            .ok_or_else(|| CliError::Input(format!("{source}: expected an array or {{\"family\": [...]}}")))?,
        _ => return Err(CliError::Input(format!("{source}: expected an array of function specs"))),
    };
    family_from_specs(specs, source)
}

fn family_from_specs(specs: &[Value], source: &str) -> Result<Vec<FamilyMember>, CliError> {
    specs
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            FunctionOnM::from_json(spec).map_err(|e| CliError::Input(format!("{source}: family member {i}: {e}")))
        })
        .collect()
}

/// Each column is one tabulated function; an optional header row names them.
pub fn parse_family_csv(text: &str, source: &str) -> Result<Vec<FamilyMember>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut names: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            CliError::from(LoadError::new(source, e.position().map(|p| p.line() as usize), e.to_string()))
        })?;
        let line = rec.position().map_or(row + 1, |p| p.line() as usize);
        if row == 0 && rec.iter().any(|f| f.parse::<f64>().is_err()) {
            names = Some(rec.iter().map(str::to_owned).collect());
            continue;
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); rec.len()];
        }
        for (col, field) in columns.iter_mut().zip(rec.iter()) {
            let v = field
                .parse::<f64>()
                .map_err(|_| LoadError::new(source, Some(line), format!("expected a real, got {field:?}")))?;
            col.push(v);
        }
    }
    if columns.is_empty() {
        return Err(CliError::Input(format!("{source}: no function values")));
    }
    Ok(columns
        .into_iter()
        .enumerate()
        .map(|(i, values)| {
            let name = names.as_ref().and_then(|n| n.get(i).cloned()).unwrap_or_else(|| format!("column {i}"));
            FamilyMember { name, function: FunctionOnM::Tabulated(values) }
        })
        .collect())
}

pub fn load_family(source: &FamilySource) -> Result<Vec<FamilyMember>, CliError> {
    match source {
        FamilySource::Inline(specs) => family_from_specs(specs, "<config family>"),
        FamilySource::Path(path) => {
            let text = read_to_string(path)?;
            let name = path.display().to_string();
            if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                parse_family_csv(&text, &name)
            } else {
                parse_family_json(&text, &name)
            }
        }
    }
}

fn parse_indices(text: &str, source: &str) -> Result<Vec<usize>, CliError> {
    if let Ok(v) = serde_json::from_str::<Vec<usize>>(text) {
        return Ok(v);
    }
    text.lines()
        .enumerate()
        .flat_map(|(line, l)| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(move |s| (line + 1, s))
        })
        .map(|(line, s)| {
            s.parse::<usize>()
                .map_err(|_| LoadError::new(source, Some(line), format!("expected an index, got {s:?}")).into())
        })
        .collect()
}

pub fn resolve_subset(selector: &SubsetSelector, space: &MetricSpace) -> Result<CompactSubset, CliError> {
    let indices = match selector {
        SubsetSelector::Named(name) if name == "all" => return Ok(CompactSubset::all(space)),
        SubsetSelector::Named(path) => {
            let path = Path::new(path);
            parse_indices(&read_to_string(path)?, &path.display().to_string())?
        }
        SubsetSelector::Indices(v) => v.clone(),
    };
    CompactSubset::new(indices, space.len()).map_err(|e| CliError::Input(format!("subset T: {e}")))
}
