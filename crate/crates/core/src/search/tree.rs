use std::fmt;

use thiserror::Error;

use super::cost::{binary_cost, split_traces, CostError};
use crate::compile::LabeledNetwork;
use crate::model::Label;

/// Nested pairing of tensor positions (0-based), the bare structure of a
/// contraction tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Shape {
    Leaf(usize),
    Join(Box<Shape>, Box<Shape>),
}

impl Shape {
    pub fn join(left: Shape, right: Shape) -> Shape {
        Shape::Join(Box::new(left), Box::new(right))
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Shape::Leaf(p) => out.push(*p),
            Shape::Join(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Leaf(p) => write!(f, "{}", p + 1),
            Shape::Join(a, b) => write!(f, "({a},{b})"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tree leaves are not a permutation of the network's tensor positions")]
    NotAPermutation,
    #[error(transparent)]
    Cost(#[from] CostError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Leaf { position: usize },
    Join { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub kind: NodeKind,
    /// Labels of the tensor this node produces.
    pub labels: Vec<Label>,
    /// Multiplications of this step (0 for leaves).
    pub cost: u128,
    /// Positive labels summed at this step, ascending.
    pub consumed: Vec<Label>,
}

impl TreeNode {
    /// Labels touched by the step: result labels plus the consumed ones.
    pub fn step_labels(&self) -> Vec<Label> {
        let mut all = self.labels.clone();
        all.extend(&self.consumed);
        all
    }
}

/// Binary contraction tree over the tensors of a [`LabeledNetwork`]. Partial
/// traces are taken before any pairwise step; their labels are in `traces`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionTree {
    nodes: Vec<TreeNode>,
    root: usize,
    traces: Vec<Label>,
    total: u128,
    pub guaranteed_optimal: bool,
}

impl ContractionTree {
    pub fn build(net: &LabeledNetwork, shape: &Shape) -> Result<ContractionTree, TreeError> {
        let mut leaves = shape.leaves();
        leaves.sort_unstable();
        if leaves != (0..net.len()).collect::<Vec<_>>() {
            return Err(TreeError::NotAPermutation);
        }
        let dims = net.dims();
        let mut traces = Vec::new();
        let leaf_labels: Vec<Vec<Label>> = net
            .tensors
            .iter()
            .map(|t| {
                let (kept, traced) = split_traces(&t.labels);
                traces.extend(traced);
                kept
            })
            .collect();
        traces.sort_unstable();

        let mut nodes = Vec::new();
        let root = Self::add(shape, &leaf_labels, &dims, &mut nodes)?;
        let mut total: u128 = 0;
        for n in &nodes {
            total = total.checked_add(n.cost).ok_or(CostError::Overflow)?;
        }
        Ok(ContractionTree {
            nodes,
            root,
            traces,
            total,
            guaranteed_optimal: false,
        })
    }

    fn add(
        shape: &Shape,
        leaf_labels: &[Vec<Label>],
        dims: &std::collections::BTreeMap<Label, u64>,
        nodes: &mut Vec<TreeNode>,
    ) -> Result<usize, TreeError> {
        let node = match shape {
            Shape::Leaf(p) => TreeNode {
                kind: NodeKind::Leaf { position: *p },
                labels: leaf_labels[*p].clone(),
                cost: 0,
                consumed: Vec::new(),
            },
            Shape::Join(a, b) => {
                let left = Self::add(a, leaf_labels, dims, nodes)?;
                let right = Self::add(b, leaf_labels, dims, nodes)?;
                let (la, lb) = (&nodes[left].labels, &nodes[right].labels);
                let cost = binary_cost(la, lb, dims)?;
                let mut consumed: Vec<Label> = la.iter().copied().filter(|l| lb.contains(l)).collect();
                let labels = la
                    .iter()
                    .filter(|l| !consumed.contains(l))
                    .chain(lb.iter().filter(|l| !consumed.contains(l)))
                    .copied()
                    .collect();
                consumed.sort_unstable();
                TreeNode {
                    kind: NodeKind::Join { left, right },
                    labels,
                    cost,
                    consumed,
                }
            }
        };
        nodes.push(node);
        Ok(nodes.len() - 1)
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    /// Nodes in post-order (children before parents).
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Pairwise steps in post-order.
    pub fn joins(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Join { .. }))
    }

    pub fn traces(&self) -> &[Label] {
        &self.traces
    }

    pub fn total_cost(&self) -> u128 {
        self.total
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Leaf { .. }))
            .count()
    }

    /// The ncon order: trace labels, then each step's consumed labels in
    /// post-order.
    pub fn linearize(&self) -> Vec<Label> {
        let mut order = self.traces.clone();
        for n in &self.nodes {
            order.extend(&n.consumed);
        }
        order
    }

    pub fn shape(&self) -> Shape {
        self.shape_of(self.root)
    }

    pub fn shape_of(&self, id: usize) -> Shape {
        match self.nodes[id].kind {
            NodeKind::Leaf { position } => Shape::Leaf(position),
            NodeKind::Join { left, right } => Shape::join(self.shape_of(left), self.shape_of(right)),
        }
    }

    /// Node id of the leaf holding tensor `position`.
    pub fn leaf(&self, position: usize) -> Option<usize> {
        self.nodes.iter().position(|n| n.kind == NodeKind::Leaf { position })
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.nodes.iter().position(|n| match n.kind {
            NodeKind::Join { left, right } => left == id || right == id,
            NodeKind::Leaf { .. } => false,
        })
    }
}
