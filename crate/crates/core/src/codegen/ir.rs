use serde::Serialize;

use super::CodegenError;
use crate::analysis::{Analysis, NetworkOutcome};
use crate::compile::{LabeledNetwork, TensorSource};
use crate::model::{is_valid_name, Label};
use crate::search::ContractionTree;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operand {
    /// One of the function's input tensors, by variable name.
    Tensor { name: String },
    /// Identity matrix as large as axis `axis` (1-based) of tensor `of`.
    Identity { of: String, axis: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NconCall {
    pub operands: Vec<Operand>,
    pub labels: Vec<Vec<Label>>,
    pub order: Vec<Label>,
    #[serde(serialize_with = "crate::serde_u128::as_string")]
    pub total_mults: u128,
}

impl NconCall {
    fn new(net: &LabeledNetwork, tree: &ContractionTree) -> Self {
        let operands = net
            .tensors
            .iter()
            .map(|t| match &t.source {
                TensorSource::Identity { of, axis } => Operand::Identity {
                    of: of.clone(),
                    axis: *axis,
                },
                TensorSource::Instance { .. } => Operand::Tensor { name: t.name.clone() },
            })
            .collect();
        NconCall {
            operands,
            labels: net.label_lists(),
            order: tree.linearize(),
            total_mults: tree.total_cost(),
        }
    }

    pub fn uses_identity(&self) -> bool {
        self.operands.iter().any(|o| matches!(o, Operand::Identity { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnvProgram {
    pub m: usize,
    pub call: NconCall,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetworkProgram {
    pub network: u8,
    pub open_count: usize,
    pub guaranteed_optimal: bool,
    /// Rendered power expression of the most expensive step.
    pub top_cost: Option<String>,
    pub call: NconCall,
    /// Empty unless the network is closed and has at least two tensors.
    pub envs: Vec<EnvProgram>,
}

impl NetworkProgram {
    pub fn tensor_count(&self) -> usize {
        self.call.operands.len()
    }

    pub fn closed(&self) -> bool {
        self.open_count == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractionProgramIR {
    pub function_name: String,
    pub generator: String,
    /// Distinct tensor names: networks ascending, instances in order, first
    /// occurrence wins. This is the order of the `tensors` argument.
    pub unique_tensors: Vec<String>,
    pub networks: Vec<NetworkProgram>,
    pub default_net: u8,
}

impl ContractionProgramIR {
    /// 0-based position of `name` in the `tensors` argument.
    pub fn tensor_index(&self, name: &str) -> usize {
        self.unique_tensors
            .iter()
            .position(|n| n == name)
            .expect("every referenced tensor is in unique_tensors")
    }

    pub fn uses_identity(&self) -> bool {
        self.networks
            .iter()
            .flat_map(|n| n.envs.iter().map(|e| &e.call))
            .any(NconCall::uses_identity)
    }
}

/// Turns a file stem into an identifier: characters outside `[A-Za-z0-9_]`
/// become `_`, and a leading non-letter gets an `f_` prefix.
pub fn function_name_from_stem(stem: &str) -> String {
    let mut s: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_alphabetic()) {
        s.insert_str(0, "f_");
    }
    s
}

pub fn build_ir(analysis: &Analysis, function_name: &str) -> Result<ContractionProgramIR, CodegenError> {
    if !analysis.validation.is_valid() {
        return Err(CodegenError::Invalid(analysis.validation.clone()));
    }
    if !is_valid_name(function_name) {
        return Err(CodegenError::BadFunctionName(function_name.to_string()));
    }
    let mut unique_tensors: Vec<String> = Vec::new();
    let mut networks = Vec::new();
    for (&n, outcome) in &analysis.networks {
        let a = match outcome {
            NetworkOutcome::Analyzed(a) => a,
            NetworkOutcome::Invalid => return Err(CodegenError::Invalid(analysis.validation.clone())),
            NetworkOutcome::Failed(message) => {
                return Err(CodegenError::SearchFailed {
                    network: n,
                    message: message.clone(),
                })
            }
        };
        for t in &a.net.tensors {
            if !unique_tensors.contains(&t.name) {
                unique_tensors.push(t.name.clone());
            }
        }
        networks.push(NetworkProgram {
            network: n,
            open_count: a.net.open_count(),
            guaranteed_optimal: a.report.guaranteed_optimal,
            top_cost: a.report.top_costs.first().map(|c| c.rendered.clone()),
            call: NconCall::new(&a.net, &a.tree),
            envs: a
                .envs
                .iter()
                .map(|e| EnvProgram {
                    m: e.m,
                    call: NconCall::new(&e.net, &e.tree),
                })
                .collect(),
        });
    }
    if unique_tensors.iter().any(|t| t == function_name) {
        return Err(CodegenError::NameCollision(function_name.to_string()));
    }
    let default_net = networks.first().map(|n| n.network).unwrap_or(1);
    Ok(ContractionProgramIR {
        function_name: function_name.to_string(),
        generator: format!("ttc {}", crate::VERSION),
        unique_tensors,
        networks,
        default_net,
    })
}
