//! Operations shared by the command line and the HTTP service. Each returns
//! a [`Failure`] that maps to both an exit code and an HTTP status.

use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;
use ttc_core::analysis::{analyze_project, Analysis, AnalysisError, AnalysisOptions};
use ttc_core::codegen::{build_ir, emit, CodegenError, Dialect};
use ttc_core::compile::TensorSource;
use ttc_core::executor::ncon_execute_any;
use ttc_core::io::{load_project, project_from_value, LoadError, SchemaError, TensorSet};
use ttc_core::{AnyTensor, DenseTensor, EnvError, Project, ValidationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("could not parse input: {}", describe(.0))]
    Parse(Vec<SchemaError>),
    #[error("project has invalid networks")]
    Invalid(Box<ValidationReport>),
    #[error("{code}: {message}")]
    Rejected { code: &'static str, message: String },
    #[error("contraction needs {mults} multiplications, over the budget of {budget}")]
    OverBudget { mults: u128, budget: u128 },
    #[error("{0}")]
    Internal(String),
}

fn describe(errs: &[SchemaError]) -> String {
    errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl Failure {
    pub fn parse(path: &str, message: impl Into<String>) -> Self {
        Failure::Parse(vec![SchemaError {
            path: path.into(),
            message: message.into(),
        }])
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Invalid(_) | Failure::Rejected { .. } | Failure::OverBudget { .. } => EXIT_INVALID,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn http_status(&self) -> u16 {
        match self {
            Failure::Parse(_) => 400,
            Failure::Invalid(_) | Failure::Rejected { .. } => 422,
            Failure::OverBudget { .. } => 413,
            Failure::Internal(_) => 500,
        }
    }

    /// Structured body describing the failure.
    pub fn to_json(&self) -> Value {
        match self {
            Failure::Parse(errs) => serde_json::json!({"error": "parse", "errors": errs}),
            Failure::Invalid(report) => serde_json::json!({"error": "invalid", "validation": report}),
            Failure::Rejected { code, message } => {
                serde_json::json!({"error": "rejected", "code": code, "message": message})
            }
            Failure::OverBudget { mults, budget } => serde_json::json!({
                "error": "over_budget",
                "total_mults": mults.to_string(),
                "budget": budget.to_string(),
            }),
            Failure::Internal(message) => serde_json::json!({"error": "internal", "message": message}),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::Parse(e.messages())
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let name = match &e {
            AnalysisError::UnknownIndexType(n) | AnalysisError::ZeroDimension(n) => n.clone(),
        };
        Failure::parse(&format!("dims.{name}"), e.to_string())
    }
}

impl From<EnvError> for Failure {
    fn from(e: EnvError) -> Self {
        Failure::Rejected {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl From<CodegenError> for Failure {
    fn from(e: CodegenError) -> Self {
        match e {
            CodegenError::Invalid(report) => Failure::Invalid(Box::new(report)),
            CodegenError::SearchFailed { .. } => Failure::Internal(e.to_string()),
            CodegenError::BadFunctionName(_) => Failure::Rejected {
                code: "E_BAD_FUNCTION_NAME",
                message: e.to_string(),
            },
            CodegenError::NameCollision(_) => Failure::Rejected {
                code: "E_NAME_COLLISION",
                message: e.to_string(),
            },
        }
    }
}

pub fn load(bytes: &[u8]) -> Result<Project, Failure> {
    Ok(load_project(bytes)?)
}

/// Loads a project embedded in a request; error paths are prefixed with `prefix`.
pub fn load_value(value: Value, prefix: &str) -> Result<Project, Failure> {
    project_from_value(value).map_err(|e| {
        Failure::Parse(
            e.messages()
                .into_iter()
                .map(|m| SchemaError {
                    path: format!("{prefix}.{}", m.path),
                    message: m.message,
                })
                .collect(),
        )
    })
}

pub fn analyze(project: &Project, opts: &AnalysisOptions) -> Result<Analysis, Failure> {
    Ok(analyze_project(project, opts)?)
}

/// Emitted source for the whole project.
pub fn export(
    project: &Project,
    opts: &AnalysisOptions,
    dialect: Dialect,
    function_name: &str,
) -> Result<String, Failure> {
    let analysis = analyze(project, opts)?;
    let ir = build_ir(&analysis, function_name)?;
    Ok(emit(&ir, dialect))
}

/// Distinct tensor names of the project in generated-function order:
/// networks ascending, instances in order, first occurrence wins.
pub fn unique_tensor_names(project: &Project) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for n in project.defined_networks() {
        for t in project.network_tensors(n) {
            if let Some(name) = project.resolved_name(t) {
                if !names.contains(&name) {
                    names.push(name);
                }
            }
        }
    }
    names
}

fn tensors_by_name(project: &Project, set: &TensorSet) -> Result<BTreeMap<String, AnyTensor>, Failure> {
    let docs: Vec<(String, &ttc_core::io::TensorDoc)> = match set {
        TensorSet::Named(map) => map.iter().map(|(k, v)| (k.clone(), v)).collect(),
        TensorSet::Positional(list) => {
            let names = unique_tensor_names(project);
            if list.len() != names.len() {
                return Err(Failure::Rejected {
                    code: "E_TENSOR_COUNT",
                    message: format!(
                        "expected {} tensors ({}), got {}",
                        names.len(),
                        names.join(", "),
                        list.len()
                    ),
                });
            }
            names.into_iter().zip(list).collect()
        }
    };
    docs.into_iter()
        .map(|(name, doc)| {
            let t = doc.to_tensor().map_err(|e| Failure::Rejected {
                code: "E_TENSOR_DATA",
                message: format!("tensor {name}: {e}"),
            })?;
            Ok((name, t))
        })
        .collect()
}

/// Contracts network `net` (or the environment of its `env`-th tensor when
/// `env > 0`) on concrete tensors.
pub fn contract(
    project: &Project,
    opts: &AnalysisOptions,
    net: u8,
    env: usize,
    tensors: &TensorSet,
    budget: Option<u128>,
) -> Result<AnyTensor, Failure> {
    let analysis = analyze(project, opts)?;
    if !analysis.networks.contains_key(&net) {
        return Err(Failure::Rejected {
            code: "E_NO_SUCH_NETWORK",
            message: format!("network {net} has no tensors"),
        });
    }
    if !analysis.validation.network_valid(net) {
        return Err(Failure::Invalid(Box::new(analysis.validation)));
    }
    let na = match analysis.network(net) {
        Some(a) => a,
        None => return Err(Failure::Internal(format!("network {net} could not be analyzed"))),
    };
    let (target, tree) = if env == 0 {
        (&na.net, &na.tree)
    } else {
        if !na.net.closed() {
            return Err(EnvError::OpenNetwork.into());
        }
        let e = na.envs.get(env - 1).ok_or(EnvError::PositionOutOfRange {
            m: env,
            n: na.net.len(),
        })?;
        (&e.net, &e.tree)
    };
    if let Some(budget) = budget {
        if tree.total_cost() > budget {
            return Err(Failure::OverBudget {
                mults: tree.total_cost(),
                budget,
            });
        }
    }

    let by_name = tensors_by_name(&analysis.project, tensors)?;
    let mut operands = Vec::with_capacity(target.len());
    for (p, t) in target.tensors.iter().enumerate() {
        let operand = match &t.source {
            TensorSource::Instance { .. } => by_name.get(&t.name).cloned().ok_or_else(|| Failure::Rejected {
                code: "E_MISSING_TENSOR",
                message: format!("no data for tensor {}", t.name),
            })?,
            TensorSource::Identity { of, axis } => {
                let size = by_name
                    .get(of)
                    .and_then(|x| x.shape().get(*axis as usize - 1).copied())
                    .ok_or_else(|| Failure::Rejected {
                        code: "E_MISSING_TENSOR",
                        message: format!("no data for tensor {of}"),
                    })?;
                AnyTensor::Real(DenseTensor::identity(size))
            }
        };
        let want = target.shape(p);
        if operand.shape() != want.as_slice() {
            return Err(Failure::Rejected {
                code: "E_SHAPE_MISMATCH",
                message: format!(
                    "tensor {} has shape {:?}, the network needs {:?}",
                    t.name,
                    operand.shape(),
                    want
                ),
            });
        }
        operands.push(operand);
    }
    ncon_execute_any(&operands, &target.label_lists(), Some(&tree.linearize()))
        .map_err(|e| Failure::Internal(e.to_string()))
}

/// Builds analysis options from the knobs shared by the CLI and the service.
pub fn options(
    mode: Option<&str>,
    seed: Option<u64>,
    dims: Option<BTreeMap<String, u64>>,
    env_search: Option<&str>,
) -> Result<AnalysisOptions, Failure> {
    let mut opts = AnalysisOptions::default();
    if let Some(m) = mode {
        opts.mode = m.parse().map_err(|e: String| Failure::parse("mode", e))?;
    }
    if let Some(s) = seed {
        opts.search.seed = s;
    }
    if let Some(d) = dims {
        opts.dims = d;
    }
    if let Some(e) = env_search {
        opts.env_search = e.parse().map_err(|e: String| Failure::parse("env_search", e))?;
    }
    Ok(opts)
}
