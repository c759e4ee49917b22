//! Contraction-order search and cost reporting.

mod cost;
mod full;
mod heuristic;
mod report;
mod tree;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

pub use cost::{binary_cost, split_traces, CostError};
pub use full::{optimal_order_full, optimal_order_full_with_cap, N_FULL_CAP};
pub use heuristic::heuristic_order;
pub use report::{cost_report, CostReport, PowerExpression, TopCost, MULTS_PER_SECOND};
pub use tree::{ContractionTree, NodeKind, Shape, TreeError, TreeNode};

use crate::compile::LabeledNetwork;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error(
        "network has {n} tensors; the exhaustive search is capped at {cap}, use --mode quick, thorough or extensive"
    )]
    TooManyTensors { n: usize, cap: usize },
    #[error("network has more than 128 distinct indices")]
    TooManyLabels,
    #[error("network has no tensors")]
    Empty,
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    #[default]
    Full,
    Quick,
    Thorough,
    Extensive,
}

impl SearchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchMode::Full => "full",
            SearchMode::Quick => "quick",
            SearchMode::Thorough => "thorough",
            SearchMode::Extensive => "extensive",
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(SearchMode::Full),
            "quick" => Ok(SearchMode::Quick),
            "thorough" => Ok(SearchMode::Thorough),
            "extensive" => Ok(SearchMode::Extensive),
            other => Err(format!("unknown search mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub seed: u64,
    /// Randomized restarts in thorough mode.
    pub restarts: usize,
    /// Wall-clock budget of extensive mode.
    pub budget: Duration,
    pub full_cap: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            seed: 0,
            restarts: 1000,
            budget: Duration::from_secs(60),
            full_cap: N_FULL_CAP,
        }
    }
}

/// Runs the search selected by `mode`.
pub fn find_order(
    net: &LabeledNetwork,
    mode: SearchMode,
    opts: &SearchOptions,
) -> Result<ContractionTree, SearchError> {
    match mode {
        SearchMode::Full => optimal_order_full_with_cap(net, opts.full_cap),
        _ => heuristic_order(net, mode, opts),
    }
}
