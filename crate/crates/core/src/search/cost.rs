use std::collections::BTreeMap;

use thiserror::Error;

use crate::compile::LabeledNetwork;
use crate::model::Label;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("contraction cost overflows 128-bit arithmetic")]
    Overflow,
    #[error("label {0} has no dimension")]
    UnknownLabel(Label),
}

/// Number of scalar multiplications of one pairwise contraction: the product
/// of the dimensions of the union of both label lists. Inputs must be
/// trace-free.
pub fn binary_cost(labels_a: &[Label], labels_b: &[Label], dims: &BTreeMap<Label, u64>) -> Result<u128, CostError> {
    let mut cost: u128 = 1;
    let union = labels_a.iter().chain(labels_b.iter().filter(|l| !labels_a.contains(l)));
    for &l in union {
        let d = *dims.get(&l).ok_or(CostError::UnknownLabel(l))?;
        cost = cost.checked_mul(d as u128).ok_or(CostError::Overflow)?;
    }
    Ok(cost)
}

/// Splits a label list into its trace-free part (order kept) and the labels
/// that repeat on the same tensor.
pub fn split_traces(labels: &[Label]) -> (Vec<Label>, Vec<Label>) {
    let mut kept = Vec::with_capacity(labels.len());
    let mut traced = Vec::new();
    for &l in labels {
        if labels.iter().filter(|&&x| x == l).count() > 1 {
            if !traced.contains(&l) {
                traced.push(l);
            }
        } else {
            kept.push(l);
        }
    }
    (kept, traced)
}

/// Bitmask form of a network for the searches: each distinct non-trace label
/// is one bit, assigned in ascending label order among positive labels so
/// that iterating bits yields labels in ascending order.
#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub legs: Vec<u128>,
    pub bit_dim: Vec<u64>,
    pub bit_label: Vec<Label>,
}

pub(crate) const MAX_LABELS: usize = 128;

impl Problem {
    pub fn new(net: &LabeledNetwork) -> Option<Problem> {
        let mut all: Vec<Label> = Vec::new();
        let trace_free: Vec<Vec<Label>> = net.tensors.iter().map(|t| split_traces(&t.labels).0).collect();
        for ls in &trace_free {
            all.extend(ls);
        }
        all.sort_unstable_by_key(|&l| (l < 0, l.abs()));
        all.dedup();
        if all.len() > MAX_LABELS {
            return None;
        }
        let bit_of = |l: Label| all.iter().position(|&x| x == l).unwrap();
        let legs = trace_free
            .iter()
            .map(|ls| ls.iter().fold(0u128, |m, &l| m | (1u128 << bit_of(l))))
            .collect();
        Some(Problem {
            legs,
            bit_dim: all.iter().map(|&l| net.dim(l)).collect(),
            bit_label: all,
        })
    }

    pub fn len(&self) -> usize {
        self.legs.len()
    }

    /// Product of the dimensions of the set bits; `None` on overflow.
    pub fn prod(&self, mut mask: u128) -> Option<u128> {
        let mut p: u128 = 1;
        while mask != 0 {
            let bit = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            p = p.checked_mul(self.bit_dim[bit] as u128)?;
        }
        Some(p)
    }

    pub fn labels_of(&self, mut mask: u128) -> Vec<Label> {
        let mut out = Vec::new();
        while mask != 0 {
            let bit = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            out.push(self.bit_label[bit]);
        }
        out
    }
}
