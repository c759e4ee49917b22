use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::tree::{ContractionTree, NodeKind};
use crate::compile::LabeledNetwork;
use crate::model::Label;

/// Scalar multiplications per second assumed by the time estimate: one
/// multiplication per cycle on a single 3 GHz core.
pub const MULTS_PER_SECOND: f64 = 3.0e9;

/// Cost of a step written as powers of index types, e.g. `chi^6*D^2`.
/// Edges with an explicit dimension appear as numeric factors.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PowerExpression {
    pub exponents: BTreeMap<u8, u32>,
    pub factors: Vec<u64>,
}

impl PowerExpression {
    pub fn of_labels(net: &LabeledNetwork, labels: &[Label]) -> Self {
        let mut expr = PowerExpression::default();
        for &l in labels {
            match net.labels.get(&l) {
                Some(info) if !info.explicit && info.index_type.is_some() => {
                    *expr.exponents.entry(info.index_type.unwrap()).or_default() += 1;
                }
                Some(info) => expr.factors.push(info.dim),
                None => {}
            }
        }
        expr.factors.sort_unstable();
        expr
    }

    pub fn render(&self, type_names: &BTreeMap<u8, String>) -> String {
        let mut parts: Vec<String> = self
            .exponents
            .iter()
            .map(|(ty, &k)| {
                let name = type_names.get(ty).cloned().unwrap_or_else(|| format!("t{ty}"));
                if k == 1 {
                    name
                } else {
                    format!("{name}^{k}")
                }
            })
            .collect();
        parts.extend(self.factors.iter().map(u64::to_string));
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopCost {
    #[serde(serialize_with = "crate::serde_u128::as_string")]
    pub mults: u128,
    pub power: PowerExpression,
    pub rendered: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub valid: bool,
    pub guaranteed_optimal: bool,
    #[serde(serialize_with = "crate::serde_u128::as_string")]
    pub total_mults: u128,
    pub time_estimate_s: f64,
    pub order: Vec<Label>,
    /// Most and second-most expensive pairwise steps (fewer when the tree
    /// has fewer steps).
    pub top_costs: Vec<TopCost>,
}

pub fn cost_report(net: &LabeledNetwork, tree: &ContractionTree, guaranteed: bool) -> CostReport {
    let mut steps: Vec<_> = tree
        .nodes()
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Join { .. }))
        .collect();
    // stable: equal costs keep post-order
    steps.sort_by_key(|n| std::cmp::Reverse(n.cost));
    let top_costs = steps
        .iter()
        .take(2)
        .map(|n| {
            let power = PowerExpression::of_labels(net, &n.step_labels());
            TopCost {
                mults: n.cost,
                rendered: power.render(&net.type_names),
                power,
            }
        })
        .collect();
    let total = tree.total_cost();
    CostReport {
        valid: true,
        guaranteed_optimal: guaranteed,
        total_mults: total,
        time_estimate_s: total as f64 / MULTS_PER_SECOND,
        order: tree.linearize(),
        top_costs,
    }
}

impl CostReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "  valid: {}", if self.valid { "yes" } else { "no" });
        let _ = writeln!(
            s,
            "  guaranteed optimal: {}",
            if self.guaranteed_optimal { "yes" } else { "no" }
        );
        let _ = writeln!(s, "  total multiplications: {}", self.total_mults);
        let _ = writeln!(s, "  estimated time (3 GHz): {:.3e} s", self.time_estimate_s);
        let _ = writeln!(s, "  order: {:?}", self.order);
        for (rank, c) in ["most", "second most"].iter().zip(&self.top_costs) {
            let _ = writeln!(s, "  {rank} expensive step: {} ({} mults)", c.rendered, c.mults);
        }
        s
    }
}
