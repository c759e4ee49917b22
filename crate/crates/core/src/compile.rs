//! Compilation of a drawn network into ncon-convention labeled form.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::model::{AnchorRef, EdgeEnd, Label, Project};
use crate::validate::{validate_project, Diagnostic};

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("network {0} has no tensors")]
    NoSuchNetwork(u8),
    #[error("network {network} is invalid ({} problems)", .errors.len())]
    InvalidNetwork { network: u8, errors: Vec<Diagnostic> },
}

/// Where an operand of a labeled network comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TensorSource {
    /// A tensor instance of the project (by instance id; synthetic networks use 0).
    Instance { id: u32 },
    /// Identity matrix replacing a trace edge of a removed tensor. Its size
    /// is the extent of axis `axis` (1-based) of the tensor named `of`.
    Identity { of: String, axis: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetTensor {
    pub name: String,
    pub source: TensorSource,
    /// Label of anchor k at position k-1.
    pub labels: Vec<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LabelInfo {
    pub dim: u64,
    /// Index type of the underlying edge, if any.
    pub index_type: Option<u8>,
    /// True when the dimension was set explicitly on the edge.
    pub explicit: bool,
}

impl LabelInfo {
    pub fn plain(dim: u64) -> Self {
        LabelInfo {
            dim,
            index_type: None,
            explicit: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledNetwork {
    pub network_no: u8,
    pub tensors: Vec<NetTensor>,
    pub labels: BTreeMap<Label, LabelInfo>,
    /// Index type names, for rendering cost expressions.
    pub type_names: BTreeMap<u8, String>,
}

impl LabeledNetwork {
    /// Builds a network directly from label lists, naming tensors `T1`, `T2`, ...
    pub fn from_labels(label_lists: Vec<Vec<Label>>, dims: &BTreeMap<Label, u64>) -> Self {
        let tensors = label_lists
            .into_iter()
            .enumerate()
            .map(|(i, labels)| NetTensor {
                name: format!("T{}", i + 1),
                source: TensorSource::Instance { id: 0 },
                labels,
            })
            .collect();
        LabeledNetwork {
            network_no: 1,
            tensors,
            labels: dims.iter().map(|(&l, &d)| (l, LabelInfo::plain(d))).collect(),
            type_names: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn dim(&self, label: Label) -> u64 {
        self.labels.get(&label).map_or(1, |i| i.dim)
    }

    pub fn dims(&self) -> BTreeMap<Label, u64> {
        self.labels.iter().map(|(&l, i)| (l, i.dim)).collect()
    }

    pub fn label_lists(&self) -> Vec<Vec<Label>> {
        self.tensors.iter().map(|t| t.labels.clone()).collect()
    }

    pub fn open_count(&self) -> usize {
        self.labels.keys().filter(|&&l| l < 0).count()
    }

    pub fn closed(&self) -> bool {
        self.open_count() == 0
    }

    /// Shape implied by the label dimensions for tensor `position` (0-based).
    pub fn shape(&self, position: usize) -> Vec<usize> {
        self.tensors[position]
            .labels
            .iter()
            .map(|&l| self.dim(l) as usize)
            .collect()
    }

    /// Checks the labeling invariants: positive labels twice, negative labels
    /// once and forming `-1..=-m`, every label with a dimension >= 1.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
        for t in &self.tensors {
            for &l in &t.labels {
                if l == 0 {
                    return Err(format!("tensor {} uses label 0", t.name));
                }
                *counts.entry(l).or_default() += 1;
            }
        }
        for (&l, &c) in &counts {
            let expected = if l > 0 { 2 } else { 1 };
            if c != expected {
                return Err(format!("label {l} appears {c} times"));
            }
            match self.labels.get(&l) {
                Some(info) if info.dim >= 1 => {}
                _ => return Err(format!("label {l} has no valid dimension")),
            }
        }
        let negatives: Vec<Label> = counts.keys().copied().filter(|&l| l < 0).collect();
        let m = negatives.len() as Label;
        if negatives.iter().any(|&l| l < -m) {
            return Err(format!("open labels {negatives:?} are not -1..=-{m}"));
        }
        if counts.len() != self.labels.len() {
            return Err("dimension table lists labels not used by any tensor".into());
        }
        Ok(())
    }
}

/// Compiles network `net` of a project. Internal edges get labels `1..=K` in
/// ascending edge-id order; an open end with plaque `k` gets label `-k`.
pub fn compile_network(project: &Project, net: u8) -> Result<LabeledNetwork, CompileError> {
    let report = validate_project(project);
    let errors: Vec<Diagnostic> = report.errors_for(net).cloned().collect();
    if !errors.is_empty() {
        return Err(CompileError::InvalidNetwork { network: net, errors });
    }
    let members: Vec<_> = project.network_tensors(net).collect();
    if members.is_empty() {
        return Err(CompileError::NoSuchNetwork(net));
    }
    let position: HashMap<u32, usize> = members.iter().enumerate().map(|(i, t)| (t.id, i)).collect();

    let mut edges: Vec<_> = project
        .edges
        .iter()
        .filter(|e| position.contains_key(&e.a.tensor))
        .collect();
    edges.sort_by_key(|e| e.id);

    let mut lists: Vec<Vec<Label>> = members.iter().map(|t| vec![0; t.anchors as usize]).collect();
    let mut labels = BTreeMap::new();
    let mut next: Label = 1;
    let place = |end: AnchorRef, label: Label, lists: &mut Vec<Vec<Label>>| {
        lists[position[&end.tensor]][end.anchor as usize - 1] = label;
    };
    for e in edges {
        let label = match &e.b {
            EdgeEnd::Anchor(b) => {
                let l = next;
                next += 1;
                place(*b, l, &mut lists);
                l
            }
            EdgeEnd::Open(o) => -(o.plaque as Label),
        };
        place(e.a, label, &mut lists);
        labels.insert(
            label,
            LabelInfo {
                dim: project.edge_dim(e).unwrap_or(1),
                index_type: Some(e.index_type),
                explicit: e.dim.is_some(),
            },
        );
    }

    let tensors = members
        .iter()
        .zip(lists)
        .map(|(t, labels)| NetTensor {
            name: project.resolved_name(t).unwrap_or_default(),
            source: TensorSource::Instance { id: t.id },
            labels,
        })
        .collect();
    Ok(LabeledNetwork {
        network_no: net,
        tensors,
        labels,
        type_names: project.index_types.iter().map(|t| (t.id, t.name.clone())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::ProjectBuilder;

    #[test]
    fn pair_with_open_plaques() {
        let mut b = ProjectBuilder::new().index_type("d", 2);
        let a = b.tensor(Some("A"), 3, 1);
        let c = b.tensor(Some("B"), 3, 1);
        b.open(1, (a, 1), 1);
        b.open(1, (a, 2), 2);
        b.link(1, (a, 3), (c, 1));
        b.open(1, (c, 2), 3);
        b.open(1, (c, 3), 4);
        let net = compile_network(&b.build(), 1).unwrap();
        assert_eq!(net.label_lists(), vec![vec![-1, -2, 1], vec![1, -3, -4]]);
        assert!(!net.closed());
        net.check_invariants().unwrap();
    }

    #[test]
    fn trace_edge() {
        let mut b = ProjectBuilder::new().index_type("d", 3);
        let t = b.tensor(None, 2, 1);
        b.link(1, (t, 1), (t, 2));
        let net = compile_network(&b.build(), 1).unwrap();
        assert_eq!(net.label_lists(), vec![vec![1, 1]]);
        assert!(net.closed());
        assert_eq!(net.tensors[0].name, "N1_1");
        net.check_invariants().unwrap();
    }

    #[test]
    fn labels_follow_edge_ids() {
        let mut b = ProjectBuilder::new().index_type("d", 3);
        let x = b.tensor(None, 2, 1);
        let y = b.tensor(None, 2, 1);
        b.link(1, (x, 2), (y, 1));
        b.link(1, (x, 1), (y, 2));
        let mut p = b.build();
        p.edges[0].id = 50;
        let net = compile_network(&p, 1).unwrap();
        assert_eq!(net.label_lists(), vec![vec![1, 2], vec![2, 1]]);
    }

    #[test]
    fn dim_override_is_recorded() {
        let mut b = ProjectBuilder::new().index_type("chi", 4);
        let x = b.tensor(None, 1, 1);
        b.open_with_dim(1, (x, 1), 1, 7);
        let net = compile_network(&b.build(), 1).unwrap();
        assert_eq!(
            net.labels[&-1],
            LabelInfo {
                dim: 7,
                index_type: Some(1),
                explicit: true
            }
        );
    }

    #[test]
    fn invalid_network_is_refused() {
        let mut b = ProjectBuilder::new().index_type("d", 3);
        b.tensor(None, 2, 1);
        assert!(matches!(
            compile_network(&b.build(), 1),
            Err(CompileError::InvalidNetwork { network: 1, .. })
        ));
        assert!(matches!(
            compile_network(&b.build(), 3),
            Err(CompileError::NoSuchNetwork(3))
        ));
    }
}
