//! Network validation. Every problem is collected into a [`ValidationReport`];
//! nothing here fails or panics on a structurally parseable project.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{is_identifier, is_reserved, AnchorRef, EdgeEnd, Project, MAX_NETWORKS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCode {
    #[serde(rename = "E_UNWIRED_ANCHOR")]
    UnwiredAnchor,
    #[serde(rename = "E_MULTIWIRED_ANCHOR")]
    MultiwiredAnchor,
    #[serde(rename = "E_CROSS_NETWORK")]
    CrossNetwork,
    #[serde(rename = "E_DUP_PLAQUE")]
    DupPlaque,
    #[serde(rename = "E_GAP_PLAQUE")]
    GapPlaque,
    #[serde(rename = "E_COPY_MISMATCH")]
    CopyMismatch,
    #[serde(rename = "E_BAD_NAME")]
    BadName,
    #[serde(rename = "E_NO_NETWORKS")]
    NoNetworks,
    /// Edge end pointing at a missing tensor, anchor or index type.
    #[serde(rename = "E_BAD_REFERENCE")]
    BadReference,
    /// Dimension below 1, or a network number outside 1..=4.
    #[serde(rename = "E_BAD_VALUE")]
    BadValue,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::UnwiredAnchor => "E_UNWIRED_ANCHOR",
            ErrorCode::MultiwiredAnchor => "E_MULTIWIRED_ANCHOR",
            ErrorCode::CrossNetwork => "E_CROSS_NETWORK",
            ErrorCode::DupPlaque => "E_DUP_PLAQUE",
            ErrorCode::GapPlaque => "E_GAP_PLAQUE",
            ErrorCode::CopyMismatch => "E_COPY_MISMATCH",
            ErrorCode::BadName => "E_BAD_NAME",
            ErrorCode::NoNetworks => "E_NO_NETWORKS",
            ErrorCode::BadReference => "E_BAD_REFERENCE",
            ErrorCode::BadValue => "E_BAD_VALUE",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Location {
    Project,
    Network { network: u8 },
    Tensor { tensor: u32 },
    Anchor { tensor: u32, anchor: u32 },
    Edge { edge: u32 },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Project => write!(f, "project"),
            Location::Network { network } => write!(f, "network {network}"),
            Location::Tensor { tensor } => write!(f, "tensor {tensor}"),
            Location::Anchor { tensor, anchor } => write!(f, "tensor {tensor} anchor {anchor}"),
            Location::Edge { edge } => write!(f, "edge {edge}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: ErrorCode,
    /// Network the problem invalidates, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<u8>,
    pub location: Location,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkVerdict {
    pub network: u8,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub networks: Vec<NetworkVerdict>,
    pub errors: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn network_valid(&self, net: u8) -> bool {
        self.networks.iter().any(|v| v.network == net && v.valid)
    }

    pub fn errors_for(&self, net: u8) -> impl Iterator<Item = &Diagnostic> {
        self.errors.iter().filter(move |d| d.network == Some(net))
    }

    pub fn has(&self, code: ErrorCode) -> bool {
        self.errors.iter().any(|d| d.code == code)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.networks {
            let verdict = if v.valid { "valid" } else { "INVALID" };
            out.push_str(&format!("network {}: {}\n", v.network, verdict));
        }
        for d in &self.errors {
            out.push_str(&format!("  {} at {}: {}\n", d.code, d.location, d.message));
        }
        if self.networks.is_empty() && self.errors.is_empty() {
            out.push_str("no networks\n");
        }
        out
    }
}

struct Collector(Vec<Diagnostic>);

impl Collector {
    fn push(&mut self, code: ErrorCode, network: Option<u8>, location: Location, message: String) {
        self.0.push(Diagnostic {
            code,
            network,
            location,
            message,
        });
    }

    /// Records an edge problem against every network the edge touches.
    fn push_each(&mut self, code: ErrorCode, networks: &BTreeSet<u8>, location: Location, message: String) {
        if networks.is_empty() {
            self.push(code, None, location, message);
            return;
        }
        for &n in networks {
            self.push(code, Some(n), location.clone(), message.clone());
        }
    }
}

pub fn validate_project(project: &Project) -> ValidationReport {
    let mut errs = Collector(Vec::new());
    let tensors: HashMap<u32, _> = project.tensors.iter().map(|t| (t.id, t)).collect();
    let net_of = |id: u32| tensors.get(&id).and_then(|t| t.network);

    if project.tensors.iter().all(|t| t.network.is_none()) {
        errs.push(
            ErrorCode::NoNetworks,
            None,
            Location::Project,
            "no tensor is assigned to a network".into(),
        );
    }

    for t in &project.tensors {
        if let Some(net) = t.network {
            if net == 0 || net > MAX_NETWORKS {
                errs.push(
                    ErrorCode::BadValue,
                    None,
                    Location::Tensor { tensor: t.id },
                    format!("network number {net} outside 1..={MAX_NETWORKS}"),
                );
            }
        }
        if t.anchors == 0 {
            errs.push(
                ErrorCode::BadValue,
                t.network,
                Location::Tensor { tensor: t.id },
                "tensor has no anchors".into(),
            );
        }
        if let Some(name) = &t.name {
            if !is_identifier(name) {
                errs.push(
                    ErrorCode::BadName,
                    t.network,
                    Location::Tensor { tensor: t.id },
                    format!("`{name}` is not a valid identifier"),
                );
            } else if is_reserved(name) {
                errs.push(
                    ErrorCode::BadName,
                    t.network,
                    Location::Tensor { tensor: t.id },
                    format!("`{name}` is a reserved word in an emission target"),
                );
            }
        }
    }

    // incidence count and the dimension seen at each anchor
    let mut wiring: HashMap<AnchorRef, Vec<Option<u64>>> = HashMap::new();
    for e in &project.edges {
        let dim = project.edge_dim(e);
        let nets: BTreeSet<u8> = e.anchor_ends().filter_map(|end| net_of(end.tensor)).collect();
        if project.index_type(e.index_type).is_none() {
            errs.push_each(
                ErrorCode::BadReference,
                &nets,
                Location::Edge { edge: e.id },
                format!("unknown index type {}", e.index_type),
            );
        }
        if dim == Some(0) {
            errs.push_each(
                ErrorCode::BadValue,
                &nets,
                Location::Edge { edge: e.id },
                "dimension must be at least 1".into(),
            );
        }
        for end in e.anchor_ends() {
            match tensors.get(&end.tensor) {
                None => errs.push_each(
                    ErrorCode::BadReference,
                    &nets,
                    Location::Edge { edge: e.id },
                    format!("edge end refers to missing tensor {}", end.tensor),
                ),
                Some(t) if end.anchor == 0 || end.anchor > t.anchors => errs.push_each(
                    ErrorCode::BadReference,
                    &nets,
                    Location::Edge { edge: e.id },
                    format!(
                        "anchor {} out of range for tensor {} with {} anchors",
                        end.anchor, t.id, t.anchors
                    ),
                ),
                Some(_) => wiring.entry(end).or_default().push(dim),
            }
        }
        if let EdgeEnd::Anchor(b) = &e.b {
            let (na, nb) = (net_of(e.a.tensor), net_of(b.tensor));
            if na != nb && tensors.contains_key(&b.tensor) && tensors.contains_key(&e.a.tensor) {
                for net in BTreeSet::from([na, nb]).into_iter().flatten() {
                    errs.push(
                        ErrorCode::CrossNetwork,
                        Some(net),
                        Location::Edge { edge: e.id },
                        format!(
                            "edge joins tensor {} ({}) and tensor {} ({})",
                            e.a.tensor,
                            describe_net(na),
                            b.tensor,
                            describe_net(nb)
                        ),
                    );
                }
            }
        }
        if let EdgeEnd::Open(o) = &e.b {
            if o.plaque == 0 || o.plaque > crate::model::MAX_PLAQUE {
                errs.push(
                    ErrorCode::BadValue,
                    net_of(e.a.tensor),
                    Location::Edge { edge: e.id },
                    format!("plaque label {} outside 1..=9", o.plaque),
                );
            }
        }
    }

    for t in project.tensors.iter().filter(|t| t.network.is_some()) {
        for anchor in 1..=t.anchors {
            let at = AnchorRef { tensor: t.id, anchor };
            match wiring.get(&at).map_or(0, Vec::len) {
                0 => errs.push(
                    ErrorCode::UnwiredAnchor,
                    t.network,
                    Location::Anchor { tensor: t.id, anchor },
                    "anchor has no index attached".into(),
                ),
                1 => {}
                n => errs.push(
                    ErrorCode::MultiwiredAnchor,
                    t.network,
                    Location::Anchor { tensor: t.id, anchor },
                    format!("anchor has {n} indices attached"),
                ),
            }
        }
    }

    // open plaques per network
    let mut plaques: BTreeMap<u8, BTreeMap<u8, Vec<u32>>> = BTreeMap::new();
    for e in &project.edges {
        if let (Some(p), Some(net)) = (e.plaque(), net_of(e.a.tensor)) {
            plaques.entry(net).or_default().entry(p).or_default().push(e.id);
        }
    }
    for (net, labels) in &plaques {
        for (p, edges) in labels {
            if edges.len() > 1 {
                for &edge in &edges[1..] {
                    errs.push(
                        ErrorCode::DupPlaque,
                        Some(*net),
                        Location::Edge { edge },
                        format!("plaque {p} used more than once in network {net}"),
                    );
                }
            }
        }
        let present: Vec<u8> = labels.keys().copied().collect();
        let contiguous = present.iter().enumerate().all(|(i, &p)| p as usize == i + 1);
        if !contiguous {
            errs.push(
                ErrorCode::GapPlaque,
                Some(*net),
                Location::Network { network: *net },
                format!("open plaques {present:?} are not contiguous from 1"),
            );
        }
    }

    // copies: same explicit name must mean same arity and per-anchor dims
    let mut first_of: BTreeMap<&str, (u32, u32, Vec<Option<u64>>)> = BTreeMap::new();
    for t in project.tensors.iter().filter(|t| t.network.is_some()) {
        let Some(name) = t.name.as_deref() else {
            continue;
        };
        let dims: Vec<Option<u64>> = (1..=t.anchors)
            .map(|anchor| {
                wiring
                    .get(&AnchorRef { tensor: t.id, anchor })
                    .and_then(|d| d.first().copied().flatten())
            })
            .collect();
        match first_of.get(name) {
            None => {
                first_of.insert(name, (t.id, t.anchors, dims));
            }
            Some((first, anchors, first_dims)) => {
                let message = if *anchors != t.anchors {
                    Some(format!(
                        "copy of `{name}` has {} anchors, tensor {first} has {anchors}",
                        t.anchors
                    ))
                } else {
                    dims.iter()
                        .zip(first_dims)
                        .position(|(a, b)| a.is_some() && b.is_some() && a != b)
                        .map(|k| {
                            format!(
                                "copy of `{name}` differs from tensor {first} in the dimension of anchor {}",
                                k + 1
                            )
                        })
                };
                if let Some(message) = message {
                    errs.push(
                        ErrorCode::CopyMismatch,
                        t.network,
                        Location::Tensor { tensor: t.id },
                        message,
                    );
                    let first_net = net_of(*first);
                    if first_net != t.network {
                        errs.push(
                            ErrorCode::CopyMismatch,
                            first_net,
                            Location::Tensor { tensor: *first },
                            format!("tensor {} is a mismatched copy of this `{name}`", t.id),
                        );
                    }
                }
            }
        }
    }

    let errors = errs.0;
    let networks = project
        .defined_networks()
        .into_iter()
        .map(|network| NetworkVerdict {
            network,
            valid: !errors.iter().any(|d| d.network == Some(network)),
        })
        .collect();
    ValidationReport {
        valid: errors.is_empty(),
        networks,
        errors,
    }
}

fn describe_net(net: Option<u8>) -> String {
    match net {
        Some(n) => format!("network {n}"),
        None => "unassigned".into(),
    }
}
