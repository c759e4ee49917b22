//! Tensor-network contraction compiler.
//!
//! A project holds up to four tensor-network diagrams. Each network is
//! validated, compiled to ncon-convention labels, searched for a cheap
//! pairwise contraction order, and emitted as a standalone contraction
//! function with the calling convention `(tensors, which_net, which_env)`.
//! Closed networks also get single-tensor environments.

pub mod analysis;
pub mod builder;
pub mod codegen;
pub mod compile;
pub mod environments;
pub mod executor;
pub mod io;
pub mod model;
pub mod random;
pub mod search;
pub mod validate;

mod serde_u128;

pub use analysis::{analyze_project, Analysis, AnalysisDocument, AnalysisOptions, EnvSearch};
pub use builder::ProjectBuilder;
pub use codegen::{build_ir, emit, CodegenError, ContractionProgramIR, Dialect};
pub use compile::{compile_network, CompileError, LabelInfo, LabeledNetwork, NetTensor, TensorSource};
pub use environments::{derive_environment_order, environment_network, EnvError};
pub use executor::{ncon_execute, AnyTensor, DenseTensor, ExecError};
pub use io::{load_project, save_project, LoadError};
pub use model::{Label, Project};
pub use search::{
    binary_cost, cost_report, find_order, ContractionTree, CostReport, SearchError, SearchMode, SearchOptions, Shape,
};
pub use validate::{validate_project, ErrorCode, ValidationReport};

/// Generator version written into emitted files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
