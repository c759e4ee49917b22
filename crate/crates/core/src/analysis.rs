//! The analyze pipeline shared by the command line and the HTTP service:
//! validate, compile each network, search an order, report costs and derive
//! environment orders for closed networks.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compile::{compile_network, LabeledNetwork};
use crate::environments::{derive_environment_order, environment_network, EnvError};
use crate::model::Project;
use crate::search::{cost_report, find_order, ContractionTree, CostReport, SearchError, SearchMode, SearchOptions};
use crate::validate::{validate_project, Diagnostic, ValidationReport};

/// Identifies the layout of [`AnalysisDocument`]. Bumped on any change of field
/// names or meaning.
pub const ANALYSIS_SCHEMA: &str = "ttc.analysis/1";

/// How environment contraction orders are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvSearch {
    /// Re-root the closed network's tree.
    #[default]
    Derived,
    /// Run a fresh search on every environment network.
    Full,
}

impl EnvSearch {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvSearch::Derived => "derived",
            EnvSearch::Full => "full",
        }
    }
}

impl FromStr for EnvSearch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "derived" => Ok(EnvSearch::Derived),
            "full" => Ok(EnvSearch::Full),
            other => Err(format!("unknown environment search `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisOptions {
    pub mode: SearchMode,
    pub search: SearchOptions,
    /// What-if overrides of index-type default dimensions, by type name.
    pub dims: BTreeMap<String, u64>,
    pub env_search: EnvSearch,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("no index type named `{0}`")]
    UnknownIndexType(String),
    #[error("dimension of `{0}` must be at least 1")]
    ZeroDimension(String),
}

/// Parses `name=value,name=value` dimension overrides.
pub fn parse_dim_overrides(spec: &str) -> Result<BTreeMap<String, u64>, String> {
    let mut out = BTreeMap::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected name=value, got `{part}`"))?;
        let value: u64 = value
            .trim()
            .parse()
            .map_err(|_| format!("`{}` is not a positive integer", value.trim()))?;
        out.insert(name.trim().to_string(), value);
    }
    Ok(out)
}

/// Returns a copy of `project` with the overrides applied to its index types.
pub fn apply_dim_overrides(project: &Project, dims: &BTreeMap<String, u64>) -> Result<Project, AnalysisError> {
    let mut p = project.clone();
    for (name, &d) in dims {
        if d == 0 {
            return Err(AnalysisError::ZeroDimension(name.clone()));
        }
        if !p.set_default_dim(name, d) {
            return Err(AnalysisError::UnknownIndexType(name.clone()));
        }
    }
    Ok(p)
}

#[derive(Debug, Clone)]
pub struct EnvAnalysis {
    /// 1-based position of the removed tensor.
    pub m: usize,
    pub net: LabeledNetwork,
    pub tree: ContractionTree,
}

#[derive(Debug, Clone)]
pub struct NetworkAnalysis {
    pub net: LabeledNetwork,
    pub tree: ContractionTree,
    pub report: CostReport,
    /// One entry per tensor for closed networks with at least two tensors.
    pub envs: Vec<EnvAnalysis>,
}

#[derive(Debug, Clone)]
pub enum NetworkOutcome {
    Analyzed(Box<NetworkAnalysis>),
    Invalid,
    /// Valid, but the requested search refused or failed.
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub project: Project,
    pub validation: ValidationReport,
    pub networks: BTreeMap<u8, NetworkOutcome>,
    pub mode: SearchMode,
    pub seed: u64,
    pub env_search: EnvSearch,
}

impl Analysis {
    pub fn network(&self, net: u8) -> Option<&NetworkAnalysis> {
        match self.networks.get(&net)? {
            NetworkOutcome::Analyzed(a) => Some(a),
            _ => None,
        }
    }

    /// True when some valid network could not be analyzed.
    pub fn has_failures(&self) -> bool {
        self.networks.values().any(|o| matches!(o, NetworkOutcome::Failed(_)))
    }

    pub fn to_document(&self) -> AnalysisDocument {
        let dims = self
            .project
            .index_types
            .iter()
            .map(|t| (t.name.clone(), t.default_dim))
            .collect();
        let networks = self
            .networks
            .iter()
            .map(|(&n, outcome)| network_entry(self, n, outcome))
            .collect();
        AnalysisDocument {
            schema: ANALYSIS_SCHEMA.into(),
            generator: format!("ttc {}", crate::VERSION),
            mode: self.mode,
            seed: self.seed,
            env_search: self.env_search,
            dims,
            valid: self.validation.is_valid(),
            errors: self
                .validation
                .errors
                .iter()
                .filter(|d| d.network.is_none())
                .cloned()
                .collect(),
            networks,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if self.networks.is_empty() {
            s.push_str("no networks\n");
        }
        for d in self.validation.errors.iter().filter(|d| d.network.is_none()) {
            let _ = writeln!(s, "{} at {}: {}", d.code, d.location, d.message);
        }
        for (&n, outcome) in &self.networks {
            let _ = writeln!(s, "network {n}");
            match outcome {
                NetworkOutcome::Analyzed(a) => {
                    s.push_str(&a.report.to_text());
                    if a.net.closed() && !a.envs.is_empty() {
                        let total: u128 = a.envs.iter().map(|e| e.tree.total_cost()).sum();
                        let _ = writeln!(
                            s,
                            "  environments: {} ({} orders, {} mults in total)",
                            a.envs.len(),
                            self.env_search.as_str(),
                            total
                        );
                    } else {
                        let _ = writeln!(s, "  environments: none (network has open indices)");
                    }
                }
                NetworkOutcome::Invalid => {
                    let _ = writeln!(s, "  valid: no");
                    for d in self.validation.errors_for(n) {
                        let _ = writeln!(s, "  {} at {}: {}", d.code, d.location, d.message);
                    }
                }
                NetworkOutcome::Failed(msg) => {
                    let _ = writeln!(s, "  valid: yes");
                    let _ = writeln!(s, "  search failed: {msg}");
                }
            }
        }
        s
    }
}

fn network_entry(analysis: &Analysis, n: u8, outcome: &NetworkOutcome) -> NetworkEntry {
    let tensors = analysis
        .project
        .network_tensors(n)
        .map(|t| analysis.project.resolved_name(t).unwrap_or_default())
        .collect();
    let errors = analysis.validation.errors_for(n).cloned().collect();
    let mut entry = NetworkEntry {
        network: n,
        valid: !matches!(outcome, NetworkOutcome::Invalid),
        tensors,
        closed: None,
        open_indices: None,
        guaranteed_optimal: None,
        total_mults: None,
        time_estimate_s: None,
        order: None,
        top_costs: Vec::new(),
        environments: None,
        search_error: None,
        errors,
    };
    match outcome {
        NetworkOutcome::Analyzed(a) => {
            entry.closed = Some(a.net.closed());
            entry.open_indices = Some(a.net.open_count());
            entry.guaranteed_optimal = Some(a.report.guaranteed_optimal);
            entry.total_mults = Some(a.report.total_mults.to_string());
            entry.time_estimate_s = Some(a.report.time_estimate_s);
            entry.order = Some(a.report.order.clone());
            entry.top_costs = a
                .report
                .top_costs
                .iter()
                .map(|c| TopCostEntry {
                    mults: c.mults.to_string(),
                    expression: c.rendered.clone(),
                })
                .collect();
            entry.environments = Some(EnvironmentsEntry {
                available: !a.envs.is_empty(),
                search: analysis.env_search,
                total_mults: a.envs.iter().map(|e| e.tree.total_cost()).sum::<u128>().to_string(),
                per_tensor: a
                    .envs
                    .iter()
                    .map(|e| EnvEntry {
                        m: e.m,
                        total_mults: e.tree.total_cost().to_string(),
                        order: e.tree.linearize(),
                    })
                    .collect(),
            });
        }
        NetworkOutcome::Invalid => {}
        NetworkOutcome::Failed(msg) => entry.search_error = Some(msg.clone()),
    }
    entry
}

/// Machine-readable analysis. Every field is always present (`null` when not
/// applicable) so consumers can rely on a fixed shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisDocument {
    pub schema: String,
    pub generator: String,
    pub mode: SearchMode,
    pub seed: u64,
    pub env_search: EnvSearch,
    /// Effective default dimension of every index type.
    pub dims: BTreeMap<String, u64>,
    pub valid: bool,
    /// Problems not tied to one network.
    pub errors: Vec<Diagnostic>,
    pub networks: Vec<NetworkEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkEntry {
    pub network: u8,
    pub valid: bool,
    pub tensors: Vec<String>,
    pub closed: Option<bool>,
    pub open_indices: Option<usize>,
    pub guaranteed_optimal: Option<bool>,
    /// Decimal string: the count may exceed 64 bits.
    pub total_mults: Option<String>,
    pub time_estimate_s: Option<f64>,
    pub order: Option<Vec<i32>>,
    pub top_costs: Vec<TopCostEntry>,
    pub environments: Option<EnvironmentsEntry>,
    pub search_error: Option<String>,
    pub errors: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopCostEntry {
    pub mults: String,
    pub expression: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentsEntry {
    pub available: bool,
    pub search: EnvSearch,
    pub total_mults: String,
    pub per_tensor: Vec<EnvEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvEntry {
    pub m: usize,
    pub total_mults: String,
    pub order: Vec<i32>,
}

fn environments(
    net: &LabeledNetwork,
    tree: &ContractionTree,
    opts: &AnalysisOptions,
) -> Result<Vec<EnvAnalysis>, String> {
    if !net.closed() || net.len() < 2 {
        return Ok(Vec::new());
    }
    (1..=net.len())
        .map(|m| {
            let env_net = environment_network(net, m).map_err(|e: EnvError| e.to_string())?;
            let env_tree = match opts.env_search {
                EnvSearch::Derived => derive_environment_order(net, tree, m).map_err(|e| e.to_string())?,
                EnvSearch::Full => find_order(&env_net, opts.mode, &opts.search).map_err(|e| e.to_string())?,
            };
            Ok(EnvAnalysis {
                m,
                net: env_net,
                tree: env_tree,
            })
        })
        .collect()
}

fn analyze_network(net: LabeledNetwork, opts: &AnalysisOptions) -> Result<NetworkAnalysis, String> {
    let tree = find_order(&net, opts.mode, &opts.search).map_err(|e: SearchError| e.to_string())?;
    let report = cost_report(&net, &tree, tree.guaranteed_optimal);
    let envs = environments(&net, &tree, opts)?;
    Ok(NetworkAnalysis {
        net,
        tree,
        report,
        envs,
    })
}

/// Runs the whole pipeline. Invalid networks are reported, not analyzed.
pub fn analyze_project(project: &Project, opts: &AnalysisOptions) -> Result<Analysis, AnalysisError> {
    let project = apply_dim_overrides(project, &opts.dims)?;
    let validation = validate_project(&project);
    let mut networks = BTreeMap::new();
    for v in &validation.networks {
        let outcome = if !v.valid {
            NetworkOutcome::Invalid
        } else {
            match compile_network(&project, v.network) {
                Ok(net) => match analyze_network(net, opts) {
                    Ok(a) => NetworkOutcome::Analyzed(Box::new(a)),
                    Err(msg) => NetworkOutcome::Failed(msg),
                },
                Err(e) => NetworkOutcome::Failed(e.to_string()),
            }
        };
        networks.insert(v.network, outcome);
    }
    Ok(Analysis {
        project,
        validation,
        networks,
        mode: opts.mode,
        seed: opts.search.seed,
        env_search: opts.env_search,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::ProjectBuilder;

    fn chain() -> Project {
        let mut b = ProjectBuilder::new()
            .index_type("a", 2)
            .index_type("b", 4)
            .index_type("c", 3)
            .index_type("d", 5);
        let x = b.tensor(Some("A"), 2, 1);
        let y = b.tensor(Some("B"), 2, 1);
        let z = b.tensor(Some("C"), 2, 1);
        b.open(1, (x, 1), 1);
        b.link(2, (x, 2), (y, 1));
        b.link(3, (y, 2), (z, 1));
        b.open(4, (z, 2), 2);
        b.build()
    }

    #[test]
    fn chain_costs_54() {
        let a = analyze_project(&chain(), &AnalysisOptions::default()).unwrap();
        let doc = a.to_document();
        assert_eq!(doc.schema, ANALYSIS_SCHEMA);
        assert_eq!(doc.networks[0].total_mults.as_deref(), Some("54"));
        assert!(!doc.networks[0].environments.as_ref().unwrap().available);
        assert!(a.to_text().contains("total multiplications: 54"));
    }

    #[test]
    fn overrides_scale_as_cube() {
        for d in [2u64, 3, 7, 10] {
            let dims = ["a", "b", "c", "d"].iter().map(|n| (n.to_string(), d)).collect();
            let opts = AnalysisOptions {
                dims,
                ..AnalysisOptions::default()
            };
            let a = analyze_project(&chain(), &opts).unwrap();
            assert_eq!(a.network(1).unwrap().report.total_mults, 2 * (d as u128).pow(3));
        }
    }

    #[test]
    fn unknown_override_is_an_error() {
        let opts = AnalysisOptions {
            dims: [("zeta".to_string(), 3)].into(),
            ..AnalysisOptions::default()
        };
        assert_eq!(
            analyze_project(&chain(), &opts).unwrap_err(),
            AnalysisError::UnknownIndexType("zeta".into())
        );
    }

    #[test]
    fn dim_override_parsing() {
        let d = parse_dim_overrides("chi=8, D=2").unwrap();
        assert_eq!(d["chi"], 8);
        assert_eq!(d["D"], 2);
        assert!(parse_dim_overrides("chi").is_err());
        assert!(parse_dim_overrides("chi=x").is_err());
    }

    #[test]
    fn closed_networks_get_environments() {
        let mut b = ProjectBuilder::new().index_type("d", 3);
        let x = b.tensor(Some("A"), 2, 1);
        let y = b.tensor(Some("B"), 2, 1);
        b.link(1, (x, 1), (y, 2));
        b.link(1, (x, 2), (y, 1));
        for env_search in [EnvSearch::Derived, EnvSearch::Full] {
            let opts = AnalysisOptions {
                env_search,
                ..AnalysisOptions::default()
            };
            let a = analyze_project(&b.clone().build(), &opts).unwrap();
            let na = a.network(1).unwrap();
            assert_eq!(na.envs.len(), 2);
            let env = a.to_document().networks[0].environments.clone().unwrap();
            assert!(env.available);
            assert_eq!(env.per_tensor.len(), 2);
        }
    }

    #[test]
    fn invalid_networks_are_reported_with_null_fields() {
        let mut b = ProjectBuilder::new().index_type("d", 2);
        let x = b.tensor(None, 3, 1);
        b.link(1, (x, 1), (x, 2));
        let a = analyze_project(&b.build(), &AnalysisOptions::default()).unwrap();
        let doc = a.to_document();
        assert!(!doc.valid);
        let net = &doc.networks[0];
        assert!(!net.valid);
        assert!(net.total_mults.is_none());
        let v = serde_json::to_value(net).unwrap();
        assert!(v.get("total_mults").unwrap().is_null());
        assert_eq!(net.errors[0].code.as_str(), "E_UNWIRED_ANCHOR");
    }

    #[test]
    fn refused_search_is_a_failure_not_a_panic() {
        let mut b = ProjectBuilder::new().index_type("d", 2);
        let ids: Vec<u32> = (0..18).map(|_| b.tensor(None, 2, 1)).collect();
        for w in 0..18 {
            b.link(1, (ids[w], 2), (ids[(w + 1) % 18], 1));
        }
        let a = analyze_project(&b.build(), &AnalysisOptions::default()).unwrap();
        assert!(a.has_failures());
        assert!(a.to_text().contains("search failed"));
        let quick = AnalysisOptions {
            mode: SearchMode::Quick,
            ..AnalysisOptions::default()
        };
        assert!(!analyze_project(&a.project, &quick).unwrap().has_failures());
    }
}
