//! Single-tensor environments of closed networks.
//!
//! Removing tensor `m` from a closed network leaves the environment network:
//! every label that touched `m` becomes open, numbered by `m`'s anchor
//! order (anchor k gives plaque k). Contracting the environment against
//! tensor `m` over all indices gives back the closed scalar. A trace edge on
//! `m` itself becomes an identity matrix joining its two plaques.
//!
//! The contraction order of an environment is derived from the closed
//! network's tree by re-rooting: the sibling subtrees met on the way from
//! leaf `m` up to the root are contracted together starting from the root
//! side, each subtree keeping its own internal order.

use thiserror::Error;

use crate::compile::{LabeledNetwork, NetTensor, TensorSource};
use crate::executor::{DenseTensor, Scalar};
use crate::model::Label;
use crate::search::{ContractionTree, NodeKind, Shape, TreeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("E_ENV_OPEN_NETWORK: environments exist only for closed networks")]
    OpenNetwork,
    #[error("tensor position {m} outside 1..={n}")]
    PositionOutOfRange { m: usize, n: usize },
    #[error("a network needs at least two tensors to have environments")]
    TooFewTensors,
    #[error("tensor position {0} is not a leaf of the tree")]
    NotALeaf(usize),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

impl EnvError {
    pub fn code(&self) -> &'static str {
        match self {
            EnvError::OpenNetwork => "E_ENV_OPEN_NETWORK",
            EnvError::PositionOutOfRange { .. } | EnvError::TooFewTensors => "E_ENV_POSITION",
            EnvError::NotALeaf(_) | EnvError::Tree(_) => "E_ENV_TREE",
        }
    }
}

fn check(net: &LabeledNetwork, m: usize) -> Result<(), EnvError> {
    if !net.closed() {
        return Err(EnvError::OpenNetwork);
    }
    if net.len() < 2 {
        return Err(EnvError::TooFewTensors);
    }
    if m == 0 || m > net.len() {
        return Err(EnvError::PositionOutOfRange { m, n: net.len() });
    }
    Ok(())
}

/// Environment network of the `m`-th tensor (1-based) of a closed network.
pub fn environment_network(net: &LabeledNetwork, m: usize) -> Result<LabeledNetwork, EnvError> {
    check(net, m)?;
    let removed = &net.tensors[m - 1];
    let mut rename: Vec<(Label, Label)> = Vec::new();
    let mut identities: Vec<NetTensor> = Vec::new();
    let mut labels = net.labels.clone();
    for (k, &l) in removed.labels.iter().enumerate() {
        let plaque = -(k as Label + 1);
        labels.remove(&l);
        if let Some(&info) = net.labels.get(&l) {
            labels.insert(plaque, info);
        }
        let first = removed.labels.iter().position(|&x| x == l).unwrap_or(k);
        let repeat = removed.labels.iter().rposition(|&x| x == l).unwrap_or(k);
        if first != repeat {
            // trace edge on the removed tensor
            if first == k {
                identities.push(NetTensor {
                    name: format!("{}_eye{}", removed.name, k + 1),
                    source: TensorSource::Identity {
                        of: removed.name.clone(),
                        axis: k as u32 + 1,
                    },
                    labels: vec![plaque, -(repeat as Label + 1)],
                });
            }
        } else {
            rename.push((l, plaque));
        }
    }
    let mut tensors: Vec<NetTensor> = net
        .tensors
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != m - 1)
        .map(|(_, t)| {
            let mut t = t.clone();
            for l in &mut t.labels {
                if let Some((_, new)) = rename.iter().find(|(old, _)| old == l) {
                    *l = *new;
                }
            }
            t
        })
        .collect();
    tensors.extend(identities);
    Ok(LabeledNetwork {
        network_no: net.network_no,
        tensors,
        labels,
        type_names: net.type_names.clone(),
    })
}

/// Contraction tree for the environment of tensor `m`, re-rooted from the
/// closed network's tree. Positions after `m` shift down by one; identity
/// tensors for trace edges on `m` are outer-multiplied last.
pub fn derive_environment_order(
    net: &LabeledNetwork,
    tree: &ContractionTree,
    m: usize,
) -> Result<ContractionTree, EnvError> {
    let env = environment_network(net, m)?;
    let leaf = tree.leaf(m - 1).ok_or(EnvError::NotALeaf(m))?;
    let mut siblings = Vec::new();
    let mut cur = leaf;
    while let Some(parent) = tree.parent(cur) {
        let NodeKind::Join { left, right } = tree.node(parent).kind else {
            unreachable!("parents are joins");
        };
        siblings.push(if left == cur { right } else { left });
        cur = parent;
    }
    let shift = |s: Shape| remap(s, m - 1);
    let mut shapes = siblings.into_iter().rev().map(|id| shift(tree.shape_of(id)));
    let mut shape = shapes.next().ok_or(EnvError::NotALeaf(m))?;
    for s in shapes {
        shape = Shape::join(shape, s);
    }
    for q in net.len() - 1..env.len() {
        shape = Shape::join(shape, Shape::Leaf(q));
    }
    Ok(ContractionTree::build(&env, &shape)?)
}

fn remap(shape: Shape, removed: usize) -> Shape {
    match shape {
        Shape::Leaf(p) => Shape::Leaf(if p > removed { p - 1 } else { p }),
        Shape::Join(a, b) => Shape::join(remap(*a, removed), remap(*b, removed)),
    }
}

/// Operands of the environment network of tensor `m`, given the operands of
/// the closed network: the remaining tensors in order, then identities.
pub fn environment_operands<T: Scalar>(
    net: &LabeledNetwork,
    closed_operands: &[DenseTensor<T>],
    m: usize,
) -> Result<Vec<DenseTensor<T>>, EnvError> {
    let env = environment_network(net, m)?;
    let removed = &closed_operands[m - 1];
    let mut ops: Vec<DenseTensor<T>> = closed_operands
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != m - 1)
        .map(|(_, t)| t.clone())
        .collect();
    for t in &env.tensors[net.len() - 1..] {
        if let TensorSource::Identity { axis, .. } = t.source {
            ops.push(DenseTensor::identity(removed.shape()[axis as usize - 1]));
        }
    }
    Ok(ops)
}
