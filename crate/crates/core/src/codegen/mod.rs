//! Code generation: an IR of ncon calls shared by the Python, MATLAB and
//! Julia emitters.
//!
//! Every emitted file holds one function `name(tensors, which_net, which_env)`.
//! `tensors` lists the distinct tensor names of the project in the order the
//! header comment documents; `which_net` defaults to the first network and
//! `which_env = M > 0` contracts the environment of the M-th tensor of a
//! closed network.

mod emit;
mod ir;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::validate::ValidationReport;

pub use emit::emit;
pub use ir::{build_ir, function_name_from_stem, ContractionProgramIR, EnvProgram, NconCall, NetworkProgram, Operand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    Python,
    Matlab,
    Julia,
}

impl Dialect {
    pub const ALL: [Dialect; 3] = [Dialect::Python, Dialect::Matlab, Dialect::Julia];

    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::Python => "python",
            Dialect::Matlab => "matlab",
            Dialect::Julia => "julia",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Dialect::Python => "py",
            Dialect::Matlab => "m",
            Dialect::Julia => "jl",
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "python" | "py" => Ok(Dialect::Python),
            "matlab" | "m" => Ok(Dialect::Matlab),
            "julia" | "jl" => Ok(Dialect::Julia),
            other => Err(format!("unknown language `{other}` (expected python, matlab or julia)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodegenError {
    #[error("project has invalid networks")]
    Invalid(ValidationReport),
    #[error("network {network}: {message}")]
    SearchFailed { network: u8, message: String },
    #[error("`{0}` cannot be used as a function name")]
    BadFunctionName(String),
    #[error("function name `{0}` collides with a tensor name")]
    NameCollision(String),
}
