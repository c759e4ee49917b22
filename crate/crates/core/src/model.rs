//! Diagram data model: index types, tensor instances with numbered anchors,
//! edges and open-index plaques.
//!
//! Style data (colors, geometry, editor state) is carried opaquely and never
//! affects compilation. Unknown fields are kept in `extra` maps so that a
//! load/save cycle preserves them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// An ncon-convention label: positive for internal indices, negative for open ones.
pub type Label = i32;

/// Maximum number of index types per project.
pub const MAX_INDEX_TYPES: usize = 4;
/// Network numbers run from 1 to this value.
pub const MAX_NETWORKS: u8 = 4;
/// Open plaques are numbered 1..=9 (keyboard digits).
pub const MAX_PLAQUE: u8 = 9;
/// Current project file format version.
pub const FORMAT_VERSION: u32 = 1;

pub type Extra = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexType {
    pub id: u8,
    pub name: String,
    pub default_dim: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<[u8; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness: Option<f64>,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorInstance {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Number of anchors, i.e. the order of the tensor.
    pub anchors: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Value>,
    #[serde(flatten)]
    pub extra: Extra,
}

/// One end of an edge attached to a tensor anchor (anchor ordinals are 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorRef {
    pub tensor: u32,
    pub anchor: u32,
}

/// The free end of an open index, carrying its output plaque number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenEnd {
    #[serde(rename = "open")]
    pub plaque: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeEnd {
    Anchor(AnchorRef),
    Open(OpenEnd),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: u32,
    #[serde(rename = "type")]
    pub index_type: u8,
    /// Explicit dimension overriding the index type's default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<u64>,
    pub a: AnchorRef,
    pub b: EdgeEnd,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Value>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Edge {
    pub fn is_open(&self) -> bool {
        matches!(self.b, EdgeEnd::Open(_))
    }

    pub fn plaque(&self) -> Option<u8> {
        match &self.b {
            EdgeEnd::Open(o) => Some(o.plaque),
            EdgeEnd::Anchor(_) => None,
        }
    }

    /// Both anchor ends of the edge (one for an open index).
    pub fn anchor_ends(&self) -> impl Iterator<Item = AnchorRef> + '_ {
        let b = match &self.b {
            EdgeEnd::Anchor(r) => Some(*r),
            EdgeEnd::Open(_) => None,
        };
        std::iter::once(self.a).chain(b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub format_version: u32,
    #[serde(default)]
    pub index_types: Vec<IndexType>,
    #[serde(default)]
    pub tensors: Vec<TensorInstance>,
    #[serde(default)]
    pub edges: Vec<Edge>,
    /// Opaque editor state (viewport, styles).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub editor: Option<Value>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Default for Project {
    fn default() -> Self {
        Project {
            format_version: FORMAT_VERSION,
            index_types: Vec::new(),
            tensors: Vec::new(),
            edges: Vec::new(),
            editor: None,
            extra: Extra::new(),
        }
    }
}

impl Project {
    pub fn tensor(&self, id: u32) -> Option<&TensorInstance> {
        self.tensors.iter().find(|t| t.id == id)
    }

    pub fn index_type(&self, id: u8) -> Option<&IndexType> {
        self.index_types.iter().find(|t| t.id == id)
    }

    /// Resolved dimension of an edge: the override if present, else the type default.
    pub fn edge_dim(&self, edge: &Edge) -> Option<u64> {
        edge.dim
            .or_else(|| self.index_type(edge.index_type).map(|t| t.default_dim))
    }

    /// Network numbers that have at least one assigned tensor, ascending.
    pub fn defined_networks(&self) -> Vec<u8> {
        let mut nets: Vec<u8> = self.tensors.iter().filter_map(|t| t.network).collect();
        nets.sort_unstable();
        nets.dedup();
        nets
    }

    /// Instances assigned to `net`, in project order.
    pub fn network_tensors(&self, net: u8) -> impl Iterator<Item = &TensorInstance> {
        self.tensors.iter().filter(move |t| t.network == Some(net))
    }

    /// Variable name of an instance: its explicit name, or `N{net}_{k}` with
    /// `k` the 1-based position within its network.
    pub fn resolved_name(&self, tensor: &TensorInstance) -> Option<String> {
        if let Some(name) = &tensor.name {
            return Some(name.clone());
        }
        let net = tensor.network?;
        let k = self.network_tensors(net).position(|t| t.id == tensor.id)? + 1;
        Some(default_name(net, k))
    }

    /// Overrides the default dimension of the named index type.
    pub fn set_default_dim(&mut self, type_name: &str, dim: u64) -> bool {
        match self.index_types.iter_mut().find(|t| t.name == type_name) {
            Some(t) => {
                t.default_dim = dim;
                true
            }
            None => false,
        }
    }
}

pub fn default_name(net: u8, position: usize) -> String {
    format!("N{net}_{position}")
}

/// Keywords of the three emission targets plus identifiers the generated
/// functions use themselves. Tensor names may not collide with any of these.
pub const RESERVED_WORDS: &[&str] = &[
    // Python
    "False",
    "None",
    "True",
    "and",
    "as",
    "assert",
    "async",
    "await",
    "break",
    "class",
    "continue",
    "def",
    "del",
    "elif",
    "else",
    "except",
    "finally",
    "for",
    "from",
    "global",
    "if",
    "import",
    "in",
    "is",
    "lambda",
    "nonlocal",
    "not",
    "or",
    "pass",
    "raise",
    "return",
    "try",
    "while",
    "with",
    "yield",
    // MATLAB
    "case",
    "catch",
    "classdef",
    "end",
    "enumeration",
    "events",
    "function",
    "methods",
    "otherwise",
    "parfor",
    "persistent",
    "properties",
    "spmd",
    "switch",
    // Julia
    "abstract",
    "baremodule",
    "begin",
    "const",
    "do",
    "export",
    "false",
    "macro",
    "module",
    "mutable",
    "primitive",
    "quote",
    "struct",
    "true",
    "type",
    "using",
    "let",
    "local",
    "outer",
    // generated-code identifiers
    "tensors",
    "which_net",
    "which_env",
    "ncon",
    "np",
    "out",
    "eye",
    "size",
    "error",
    "nargin",
    "isempty",
    "nothing",
    "Any",
    "Int",
    "ValueError",
];

pub fn is_reserved(name: &str) -> bool {
    RESERVED_WORDS.contains(&name)
}

/// `[A-Za-z][A-Za-z0-9_]*`
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn is_valid_name(name: &str) -> bool {
    is_identifier(name) && !is_reserved(name)
}
