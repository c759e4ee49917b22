//! Project files and tensor data files.
//!
//! Projects are JSON documents (`.tnp`):
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "index_types": [{"id": 1, "name": "chi", "default_dim": 8}],
//!   "tensors": [{"id": 1, "name": "A", "anchors": 2, "network": 1}],
//!   "edges": [
//!     {"id": 1, "type": 1, "a": {"tensor": 1, "anchor": 1}, "b": {"tensor": 1, "anchor": 2}},
//!     {"id": 2, "type": 1, "dim": 3, "a": {"tensor": 2, "anchor": 1}, "b": {"open": 1}}
//!   ]
//! }
//! ```
//!
//! Saving is canonical: keys sorted, two-space indentation, trailing newline.
//! Fields the schema does not know are kept and written back.
//!
//! Tensor data files hold real or complex row-major arrays, either keyed by
//! tensor name or as a list in the generated function's tensor order:
//!
//! ```json
//! {"tensors": {"A": {"shape": [2, 2], "data": [1, 2, 3, 4]},
//!              "B": {"shape": [2], "data": [1, 0], "imag": [0, 1]}}}
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::executor::{AnyTensor, DenseTensor, ExecError};
use crate::model::{EdgeEnd, Project, FORMAT_VERSION, MAX_INDEX_TYPES, MAX_NETWORKS, MAX_PLAQUE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("syntax error at byte {offset} (line {line}, column {column}): {message}")]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format_version {0} (this build reads version {FORMAT_VERSION})")]
    UnsupportedVersion(u64),
    #[error("schema violations: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Schema(Vec<SchemaError>),
}

impl LoadError {
    /// Located messages, one per problem.
    pub fn messages(&self) -> Vec<SchemaError> {
        match self {
            LoadError::Syntax { offset, message, .. } => vec![SchemaError {
                path: format!("@{offset}"),
                message: message.clone(),
            }],
            LoadError::UnsupportedVersion(_) => vec![SchemaError {
                path: "format_version".into(),
                message: self.to_string(),
            }],
            LoadError::Schema(errs) => errs.clone(),
        }
    }
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let line_start: usize = bytes
        .split(|&b| b == b'\n')
        .take(line.saturating_sub(1))
        .map(|l| l.len() + 1)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

pub fn load_project(bytes: &[u8]) -> Result<Project, LoadError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| LoadError::Syntax {
        offset: byte_offset(bytes, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    project_from_value(value)
}

pub fn project_from_value(value: Value) -> Result<Project, LoadError> {
    let schema = |path: &str, message: &str| {
        LoadError::Schema(vec![SchemaError {
            path: path.into(),
            message: message.into(),
        }])
    };
    if !value.is_object() {
        return Err(schema("$", "expected an object"));
    }
    match value.get("format_version").map(Value::as_u64) {
        None => return Err(schema("format_version", "missing field")),
        Some(None) => return Err(schema("format_version", "expected an integer")),
        Some(Some(v)) if v != FORMAT_VERSION as u64 => return Err(LoadError::UnsupportedVersion(v)),
        Some(Some(_)) => {}
    }
    let project: Project = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        schema(&path, &e.into_inner().to_string())
    })?;
    let errs = check_schema(&project);
    if errs.is_empty() {
        Ok(project)
    } else {
        Err(LoadError::Schema(errs))
    }
}

/// Structural checks beyond field types: ranges, unique ids, references.
pub fn check_schema(p: &Project) -> Vec<SchemaError> {
    let mut errs = Vec::new();
    let mut err = |path: String, message: String| errs.push(SchemaError { path, message });

    if p.index_types.len() > MAX_INDEX_TYPES {
        err(
            "index_types".into(),
            format!("at most {MAX_INDEX_TYPES} index types, found {}", p.index_types.len()),
        );
    }
    let mut ids = HashSet::new();
    for (i, t) in p.index_types.iter().enumerate() {
        if t.id == 0 || t.id as usize > MAX_INDEX_TYPES {
            err(format!("index_types[{i}].id"), format!("id {} outside 1..=4", t.id));
        }
        if !ids.insert(t.id) {
            err(format!("index_types[{i}].id"), format!("duplicate id {}", t.id));
        }
        if t.default_dim == 0 {
            err(format!("index_types[{i}].default_dim"), "must be at least 1".into());
        }
    }

    let mut anchors = BTreeMap::new();
    for (i, t) in p.tensors.iter().enumerate() {
        if anchors.insert(t.id, t.anchors).is_some() {
            err(format!("tensors[{i}].id"), format!("duplicate id {}", t.id));
        }
        if t.anchors == 0 {
            err(
                format!("tensors[{i}].anchors"),
                "a tensor needs at least one anchor".into(),
            );
        }
        if let Some(n) = t.network {
            if n == 0 || n > MAX_NETWORKS {
                err(format!("tensors[{i}].network"), format!("network {n} outside 1..=4"));
            }
        }
    }

    let mut edge_ids = HashSet::new();
    for (i, e) in p.edges.iter().enumerate() {
        if !edge_ids.insert(e.id) {
            err(format!("edges[{i}].id"), format!("duplicate id {}", e.id));
        }
        if p.index_type(e.index_type).is_none() {
            err(
                format!("edges[{i}].type"),
                format!("unknown index type {}", e.index_type),
            );
        }
        if e.dim == Some(0) {
            err(format!("edges[{i}].dim"), "must be at least 1".into());
        }
        let mut ends = vec![("a", e.a)];
        match &e.b {
            EdgeEnd::Anchor(b) => ends.push(("b", *b)),
            EdgeEnd::Open(o) => {
                if o.plaque == 0 || o.plaque > MAX_PLAQUE {
                    err(
                        format!("edges[{i}].b.open"),
                        format!("plaque {} outside 1..=9", o.plaque),
                    );
                }
            }
        }
        for (side, end) in ends {
            match anchors.get(&end.tensor) {
                None => err(
                    format!("edges[{i}].{side}.tensor"),
                    format!("no tensor with id {}", end.tensor),
                ),
                Some(&n) if end.anchor == 0 || end.anchor > n => err(
                    format!("edges[{i}].{side}.anchor"),
                    format!("anchor {} outside 1..={n}", end.anchor),
                ),
                Some(_) => {}
            }
        }
    }
    errs
}

fn sorted(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sorted(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sorted).collect()),
        other => other,
    }
}

pub fn project_to_value(project: &Project) -> Value {
    sorted(serde_json::to_value(project).expect("project serializes"))
}

/// Canonical serialization.
pub fn save_project(project: &Project) -> Vec<u8> {
    let mut out = serde_json::to_string_pretty(&project_to_value(project)).expect("valid JSON");
    out.push('\n');
    out.into_bytes()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDoc {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<f64>>,
}

impl TensorDoc {
    pub fn to_tensor(&self) -> Result<AnyTensor, ExecError> {
        match &self.imag {
            None => Ok(AnyTensor::Real(DenseTensor::new(
                self.shape.clone(),
                self.data.clone(),
            )?)),
            Some(imag) => {
                if imag.len() != self.data.len() {
                    return Err(ExecError::DataLength {
                        shape: self.shape.clone(),
                        len: imag.len(),
                    });
                }
                let data = self
                    .data
                    .iter()
                    .zip(imag)
                    .map(|(&re, &im)| Complex64::new(re, im))
                    .collect();
                Ok(AnyTensor::Complex(DenseTensor::new(self.shape.clone(), data)?))
            }
        }
    }

    pub fn from_tensor(t: &AnyTensor) -> Self {
        match t {
            AnyTensor::Real(r) => TensorDoc {
                shape: r.shape().to_vec(),
                data: r.data().to_vec(),
                imag: None,
            },
            AnyTensor::Complex(c) => TensorDoc {
                shape: c.shape().to_vec(),
                data: c.data().iter().map(|z| z.re).collect(),
                imag: Some(c.data().iter().map(|z| z.im).collect()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TensorSet {
    Named(BTreeMap<String, TensorDoc>),
    Positional(Vec<TensorDoc>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub tensors: TensorSet,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::ProjectBuilder;

    const SMALL: &str = r#"{
  "format_version": 1,
  "index_types": [{"id": 1, "name": "d", "default_dim": 2, "color": [10, 20, 30]}],
  "tensors": [
    {"id": 1, "name": "A", "anchors": 2, "network": 1, "geometry": {"x": 1.5, "y": -2}},
    {"id": 2, "anchors": 2, "network": 1, "layer": "top"}
  ],
  "edges": [
    {"id": 1, "type": 1, "a": {"tensor": 1, "anchor": 2}, "b": {"tensor": 2, "anchor": 1}},
    {"id": 2, "type": 1, "a": {"tensor": 1, "anchor": 1}, "b": {"open": 1}},
    {"id": 3, "type": 1, "dim": 5, "a": {"tensor": 2, "anchor": 2}, "b": {"open": 2, "geometry": [3, 4]}}
  ],
  "editor": {"zoom": 2.0},
  "notes": "kept"
}"#;

    #[test]
    fn loads_and_round_trips() {
        let p = load_project(SMALL.as_bytes()).unwrap();
        assert_eq!(p.tensors.len(), 2);
        assert_eq!(p.edges[2].dim, Some(5));
        assert_eq!(p.extra["notes"], Value::String("kept".into()));
        assert_eq!(p.tensors[1].extra["layer"], Value::String("top".into()));
        let bytes = save_project(&p);
        let again = load_project(&bytes).unwrap();
        assert_eq!(p, again);
        assert_eq!(bytes, save_project(&again));
    }

    #[test]
    fn canonical_regardless_of_key_order_and_whitespace() {
        let a = load_project(SMALL.as_bytes()).unwrap();
        let reordered = r#"{"notes":"kept","editor":{"zoom":2.0},
          "tensors":[{"network":1,"anchors":2,"name":"A","id":1,"geometry":{"y":-2,"x":1.5}},
                     {"layer":"top","network":1,"anchors":2,"id":2}],
          "format_version":1,
          "edges":[{"b":{"anchor":1,"tensor":2},"a":{"anchor":2,"tensor":1},"type":1,"id":1},
                   {"b":{"open":1},"a":{"anchor":1,"tensor":1},"type":1,"id":2},
                   {"dim":5,"b":{"geometry":[3,4],"open":2},"a":{"anchor":2,"tensor":2},"type":1,"id":3}],
          "index_types":[{"color":[10,20,30],"default_dim":2,"name":"d","id":1}]}"#;
        let b = load_project(reordered.as_bytes()).unwrap();
        assert_eq!(save_project(&a), save_project(&b));
    }

    #[test]
    fn truncated_file_reports_offset() {
        let cut = &SMALL.as_bytes()[..100];
        match load_project(cut) {
            Err(LoadError::Syntax { offset, .. }) => assert!(offset <= 100 && offset > 50),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_version() {
        let doc = r#"{"format_version": 7, "tensors": []}"#;
        assert_eq!(load_project(doc.as_bytes()), Err(LoadError::UnsupportedVersion(7)));
    }

    #[test]
    fn schema_errors_carry_paths() {
        let doc = r#"{"format_version": 1, "tensors": [{"id": 1, "anchors": "two"}]}"#;
        let Err(LoadError::Schema(errs)) = load_project(doc.as_bytes()) else {
            panic!("expected schema error");
        };
        assert_eq!(errs[0].path, "tensors[0].anchors");

        let doc = r#"{"format_version": 1, "index_types": [{"id": 1, "name": "d", "default_dim": 2}],
            "tensors": [{"id": 1, "anchors": 1, "network": 1}],
            "edges": [{"id": 1, "type": 1, "a": {"tensor": 1, "anchor": 2}, "b": {"open": 12}}]}"#;
        let Err(LoadError::Schema(errs)) = load_project(doc.as_bytes()) else {
            panic!("expected schema error");
        };
        let paths: Vec<&str> = errs.iter().map(|e| e.path.as_str()).collect();
        assert_eq!(paths, vec!["edges[0].b.open", "edges[0].a.anchor"]);
    }

    #[test]
    fn empty_tensor_list_loads() {
        let p = load_project(br#"{"format_version": 1, "tensors": []}"#).unwrap();
        assert!(p.tensors.is_empty());
    }

    #[test]
    fn builder_projects_round_trip() {
        let mut b = ProjectBuilder::new().index_type("chi", 3);
        let x = b.tensor(Some("X"), 2, 2);
        b.link(1, (x, 1), (x, 2));
        let p = b.build();
        assert_eq!(load_project(&save_project(&p)).unwrap(), p);
    }

    #[test]
    fn tensor_docs() {
        let f: TensorFile = serde_json::from_str(
            r#"{"tensors": {"A": {"shape": [2], "data": [1, 2]}, "B": {"shape": [1], "data": [1], "imag": [2]}}}"#,
        )
        .unwrap();
        let TensorSet::Named(map) = f.tensors else {
            panic!("expected named set");
        };
        assert!(matches!(map["A"].to_tensor().unwrap(), AnyTensor::Real(_)));
        let b = map["B"].to_tensor().unwrap();
        assert!(matches!(b, AnyTensor::Complex(_)));
        assert_eq!(TensorDoc::from_tensor(&b), map["B"]);
        let bad = TensorDoc {
            shape: vec![3],
            data: vec![1.0],
            imag: None,
        };
        assert!(bad.to_tensor().is_err());
    }
}
