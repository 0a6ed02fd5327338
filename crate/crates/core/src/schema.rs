//! Checker for the CSV and JSON artifacts written by the command-line tool.
//!
//! CSV files may open with `#` comment lines (version and config hash); the
//! first non-comment line is the header, which determines the table kind.
//! JSON documents carry a string `kind` field that selects the required keys.

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("empty document")]
    Empty,
    #[error("unknown header: {0}")]
    UnknownHeader(String),
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("unknown kind: {0}")]
    UnknownKind(String),
    #[error("field `{0}` missing or of the wrong type")]
    Field(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Cell {
    Int,
    Num,
    Bool,
    OptNum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CsvKind {
    Convergence,
    Disjoint,
    Tail,
    Mu,
}

impl CsvKind {
    pub const ALL: [CsvKind; 4] = [CsvKind::Convergence, CsvKind::Disjoint, CsvKind::Tail, CsvKind::Mu];

    fn columns(self) -> &'static [(&'static str, Cell)] {
        use Cell::*;
        match self {
            CsvKind::Convergence => &[
                ("n", Int),
                ("replicate", Int),
                ("mincut_micro", Int),
                ("i_hat_micro", Num),
                ("ratio", Num),
                ("stabilized", Bool),
                ("seconds", OptNum),
            ],
            CsvKind::Disjoint => &[
                ("n", Int),
                ("replicate", Int),
                ("count", Int),
                ("i_hat_micro", Num),
                ("ratio", Num),
                ("stabilized", Bool),
                ("seconds", OptNum),
            ],
            CsvKind::Tail => &[
                ("n", Int),
                ("reps", Int),
                ("deviations", Int),
                ("upper", Int),
                ("lower", Int),
                ("frequency", Num),
                ("wilson_low", Num),
                ("wilson_high", Num),
            ],
            CsvKind::Mu => &[
                ("direction_x", Int),
                ("direction_y", Int),
                ("n", Int),
                ("reps", Int),
                ("mean_micro", Num),
                ("stderr_micro", Num),
            ],
        }
    }
}

fn cell_ok(cell: Cell, s: &str) -> bool {
    match cell {
        Cell::Int => s.parse::<i64>().is_ok(),
        Cell::Num => s.parse::<f64>().is_ok(),
        Cell::Bool => s == "true" || s == "false",
        Cell::OptNum => s.is_empty() || s.parse::<f64>().is_ok(),
    }
}

/// Validates a CSV artifact and returns its kind and number of data rows.
pub fn check_csv(text: &str) -> Result<(CsvKind, usize), SchemaError> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let header = reader.headers().map_err(|e| SchemaError::Row { row: 0, reason: e.to_string() })?.clone();
    if header.is_empty() {
        return Err(SchemaError::Empty);
    }
    let names: Vec<&str> = header.iter().collect();
    let kind = CsvKind::ALL
        .into_iter()
        .find(|k| k.columns().iter().map(|c| c.0).eq(names.iter().copied()))
        .ok_or_else(|| SchemaError::UnknownHeader(names.join(",")))?;
    let mut rows = 0;
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| SchemaError::Row { row: i + 1, reason: e.to_string() })?;
        for ((name, cell), value) in kind.columns().iter().zip(rec.iter()) {
            if !cell_ok(*cell, value) {
                return Err(SchemaError::Row { row: i + 1, reason: format!("bad {name}: {value:?}") });
            }
        }
        rows += 1;
    }
    Ok((kind, rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Int,
    Num,
    Bool,
    Str,
    Arr,
    Obj,
}

fn ty_ok(ty: Ty, v: &Value) -> bool {
    match ty {
        Ty::Int => v.is_i64() || v.is_u64(),
        Ty::Num => v.is_number() || v.is_null(),
        Ty::Bool => v.is_boolean(),
        Ty::Str => v.is_string(),
        Ty::Arr => v.is_array(),
        Ty::Obj => v.is_object(),
    }
}

fn required(kind: &str) -> Option<&'static [(&'static str, Ty)]> {
    use Ty::*;
    Some(match kind {
        "maxflow" => &[("value_micro", Int), ("box_used", Int), ("stabilized", Bool), ("mincut", Arr), ("source_size", Int)],
        "oracle" => &[("value_micro", Int), ("radius", Int), ("maxflow_micro", Int)],
        "ifun" => &[("i_micro", Str), ("i_float", Num), ("mu", Arr)],
        "summary" => &[("i_hat_micro", Str), ("summary", Arr), ("warnings", Arr)],
        "tail" => &[("rows", Arr), ("trend", Obj), ("nonincreasing", Bool)],
        "disjoint" => &[("i_hat_micro", Str), ("records", Arr), ("warnings", Arr)],
        "mu" => &[("entries", Arr)],
        _ => return None,
    })
}

const SUMMARY_ROW: &[(&str, Ty)] = &[
    ("n", Ty::Int),
    ("count", Ty::Int),
    ("mean", Ty::Num),
    ("std", Ty::Num),
    ("min", Ty::Num),
    ("max", Ty::Num),
    ("deviation_frequency", Ty::Num),
];

fn check_fields(v: &Value, fields: &[(&str, Ty)]) -> Result<(), SchemaError> {
    for (name, ty) in fields {
        match v.get(name) {
            Some(x) if ty_ok(*ty, x) => {}
            _ => return Err(SchemaError::Field(name.to_string())),
        }
    }
    Ok(())
}

/// Validates a JSON artifact and returns its `kind`.
pub fn check_json(text: &str) -> Result<String, SchemaError> {
    if text.trim().is_empty() {
        return Err(SchemaError::Empty);
    }
    let v: Value = serde_json::from_str(text).map_err(|e| SchemaError::Json(e.to_string()))?;
    check_fields(&v, &[("kind", Ty::Str), ("version", Ty::Str), ("config_hash", Ty::Str)])?;
    let kind = v["kind"].as_str().unwrap_or_default().to_string();
    let fields = required(&kind).ok_or_else(|| SchemaError::UnknownKind(kind.clone()))?;
    check_fields(&v, fields)?;
    match kind.as_str() {
        "summary" => {
            for row in v["summary"].as_array().into_iter().flatten() {
                check_fields(row, SUMMARY_ROW)?;
            }
        }
        "maxflow" => {
            let ok = v["mincut"]
                .as_array()
                .into_iter()
                .flatten()
                .all(|b| b.as_array().is_some_and(|xs| xs.len() == 4 && xs.iter().all(Value::is_i64)));
            if !ok {
                return Err(SchemaError::Field("mincut".into()));
            }
        }
        _ => {}
    }
    Ok(kind)
}

/// Dispatches on the first non-blank character.
pub fn check_document(text: &str) -> Result<String, SchemaError> {
    match text.trim_start().chars().next() {
        None => Err(SchemaError::Empty),
        Some('{') => check_json(text),
        Some(_) => check_csv(text).map(|(k, _)| format!("{k:?}").to_lowercase()),
    }
}
