use std::fmt::Write as _;

use super::ir::{ContractionProgramIR, NconCall, NetworkProgram, Operand};
use super::Dialect;
use crate::model::Label;

/// Per-dialect syntax. Everything that differs between the targets lives here.
struct Syntax {
    comment: &'static str,
    indent: &'static str,
    operands_open: &'static str,
    operands_close: &'static str,
    labels_open: &'static str,
    labels_close: &'static str,
    empty_order: &'static str,
}

impl Syntax {
    fn of(d: Dialect) -> Syntax {
        match d {
            Dialect::Python => Syntax {
                comment: "#",
                indent: "    ",
                operands_open: "[",
                operands_close: "]",
                labels_open: "[",
                labels_close: "]",
                empty_order: "[]",
            },
            Dialect::Matlab => Syntax {
                comment: "%",
                indent: "    ",
                operands_open: "{",
                operands_close: "}",
                labels_open: "{",
                labels_close: "}",
                empty_order: "[]",
            },
            Dialect::Julia => Syntax {
                comment: "#",
                indent: "    ",
                operands_open: "Any[",
                operands_close: "]",
                labels_open: "[",
                labels_close: "]",
                empty_order: "Int[]",
            },
        }
    }
}

struct Out {
    text: String,
    indent: &'static str,
}

impl Out {
    fn line(&mut self, depth: usize, s: &str) {
        if !s.is_empty() {
            for _ in 0..depth {
                self.text.push_str(self.indent);
            }
            self.text.push_str(s);
        }
        self.text.push('\n');
    }
}

fn label_list(labels: &[Label]) -> String {
    let parts: Vec<String> = labels.iter().map(Label::to_string).collect();
    format!("[{}]", parts.join(", "))
}

fn operand(d: Dialect, op: &Operand) -> String {
    match op {
        Operand::Tensor { name } => name.clone(),
        Operand::Identity { of, axis } => match d {
            Dialect::Python => format!("np.eye({of}.shape[{}])", axis - 1),
            Dialect::Matlab => format!("eye(size({of}, {axis}))"),
            Dialect::Julia => format!("[Float64(_i == _j) for _i in 1:size({of}, {axis}), _j in 1:size({of}, {axis})]"),
        },
    }
}

fn ncon_call(d: Dialect, syn: &Syntax, call: &NconCall) -> String {
    let ops: Vec<String> = call.operands.iter().map(|o| operand(d, o)).collect();
    let labels: Vec<String> = call.labels.iter().map(|l| label_list(l)).collect();
    let order = if call.order.is_empty() {
        syn.empty_order.to_string()
    } else {
        label_list(&call.order)
    };
    let ops = format!("{}{}{}", syn.operands_open, ops.join(", "), syn.operands_close);
    let labels = format!("{}{}{}", syn.labels_open, labels.join(", "), syn.labels_close);
    match d {
        Dialect::Julia => format!("ncon({ops}, {labels}; order = {order})"),
        _ => format!("ncon({ops}, {labels}, {order})"),
    }
}

fn network_summary(n: &NetworkProgram) -> Vec<String> {
    let mut first = format!(
        "network {}: {} tensor{}, ",
        n.network,
        n.tensor_count(),
        if n.tensor_count() == 1 { "" } else { "s" }
    );
    if n.closed() {
        first.push_str("closed");
    } else {
        let _ = write!(first, "{} open indices", n.open_count);
    }
    let _ = write!(
        first,
        ", {} mults ({})",
        n.call.total_mults,
        if n.guaranteed_optimal {
            "optimal"
        } else {
            "heuristic order"
        }
    );
    let mut lines = vec![first];
    if let Some(top) = &n.top_cost {
        lines.push(format!("    most expensive step: {top}"));
    }
    if !n.envs.is_empty() {
        let total: u128 = n.envs.iter().map(|e| e.call.total_mults).sum();
        lines.push(format!(
            "    environments: which_env = 1..{}, {} mults in total",
            n.envs.len(),
            total
        ));
    }
    lines
}

fn header(ir: &ContractionProgramIR, d: Dialect, syn: &Syntax, out: &mut Out) {
    let tensor_list = match d {
        Dialect::Matlab => format!("{{{}}}", ir.unique_tensors.join(", ")),
        _ => format!("[{}]", ir.unique_tensors.join(", ")),
    };
    let mut lines = vec![
        format!("{}(tensors, which_net, which_env)", ir.function_name),
        format!("Generated by {}. Do not edit by hand.", ir.generator),
        String::new(),
        format!("tensors = {tensor_list}"),
        format!("which_net: network to contract, defaults to {}", ir.default_net),
        "which_env: 0 contracts the network as drawn; M > 0 contracts the".to_string(),
        "           environment of the M-th tensor of a closed network".to_string(),
        String::new(),
    ];
    for n in &ir.networks {
        lines.extend(network_summary(n));
    }
    lines.push(String::new());
    lines.push(match d {
        Dialect::Python => "Requires an importable `ncon` module.".to_string(),
        Dialect::Matlab => "Requires ncon.m on the MATLAB path.".to_string(),
        Dialect::Julia => "Requires an `ncon` function in scope (e.g. from TensorOperations).".to_string(),
    });
    for l in lines {
        if l.is_empty() {
            out.line(0, syn.comment);
        } else {
            out.line(0, &format!("{} {}", syn.comment, l));
        }
    }
}

fn net_list(ir: &ContractionProgramIR) -> String {
    let nets: Vec<String> = ir.networks.iter().map(|n| n.network.to_string()).collect();
    nets.join(", ")
}

fn open_env_message(n: &NetworkProgram) -> String {
    if n.closed() {
        format!(
            "network {} has {} tensor, so it has no environments",
            n.network,
            n.tensor_count()
        )
    } else {
        format!(
            "network {} has open indices; environments exist only for closed networks",
            n.network
        )
    }
}

fn env_range_message(n: &NetworkProgram) -> String {
    format!(
        "which_env must be between 0 and {} for network {}",
        n.envs.len(),
        n.network
    )
}

fn emit_python(ir: &ContractionProgramIR, syn: &Syntax, out: &mut Out) {
    out.line(0, "");
    out.line(0, "from ncon import ncon");
    if ir.uses_identity() {
        out.line(0, "import numpy as np");
    }
    out.line(0, "");
    out.line(0, "");
    out.line(
        0,
        &format!("def {}(tensors, which_net=None, which_env=0):", ir.function_name),
    );
    for (i, t) in ir.unique_tensors.iter().enumerate() {
        out.line(1, &format!("{t} = tensors[{i}]"));
    }
    out.line(1, "if which_net is None:");
    out.line(2, &format!("which_net = {}", ir.default_net));
    for n in &ir.networks {
        out.line(1, &format!("if which_net == {}:", n.network));
        out.line(2, "if which_env == 0:");
        out.line(3, &format!("return {}", ncon_call(Dialect::Python, syn, &n.call)));
        if n.envs.is_empty() {
            out.line(2, &format!("raise ValueError(\"{}\")", open_env_message(n)));
        } else {
            for e in &n.envs {
                out.line(2, &format!("if which_env == {}:", e.m));
                out.line(3, &format!("return {}", ncon_call(Dialect::Python, syn, &e.call)));
            }
            out.line(2, &format!("raise ValueError(\"{}\")", env_range_message(n)));
        }
    }
    out.line(
        1,
        &format!("raise ValueError(\"which_net must be one of {}\")", net_list(ir)),
    );
}

fn emit_matlab(ir: &ContractionProgramIR, syn: &Syntax, out: &mut Out) {
    out.line(0, "");
    out.line(
        0,
        &format!("function out = {}(tensors, which_net, which_env)", ir.function_name),
    );
    out.line(1, "if nargin < 2 || isempty(which_net)");
    out.line(2, &format!("which_net = {};", ir.default_net));
    out.line(1, "end");
    out.line(1, "if nargin < 3 || isempty(which_env)");
    out.line(2, "which_env = 0;");
    out.line(1, "end");
    for (i, t) in ir.unique_tensors.iter().enumerate() {
        out.line(1, &format!("{t} = tensors{{{}}};", i + 1));
    }
    out.line(1, "switch which_net");
    for n in &ir.networks {
        out.line(2, &format!("case {}", n.network));
        out.line(3, "switch which_env");
        out.line(4, "case 0");
        out.line(5, &format!("out = {};", ncon_call(Dialect::Matlab, syn, &n.call)));
        for e in &n.envs {
            out.line(4, &format!("case {}", e.m));
            out.line(5, &format!("out = {};", ncon_call(Dialect::Matlab, syn, &e.call)));
        }
        out.line(4, "otherwise");
        let msg = if n.envs.is_empty() {
            open_env_message(n)
        } else {
            env_range_message(n)
        };
        out.line(5, &format!("error('{msg}');"));
        out.line(3, "end");
    }
    out.line(2, "otherwise");
    out.line(3, &format!("error('which_net must be one of {}');", net_list(ir)));
    out.line(1, "end");
    out.line(0, "end");
}

fn emit_julia(ir: &ContractionProgramIR, syn: &Syntax, out: &mut Out) {
    out.line(0, "");
    out.line(
        0,
        &format!("function {}(tensors, which_net=nothing, which_env=0)", ir.function_name),
    );
    for (i, t) in ir.unique_tensors.iter().enumerate() {
        out.line(1, &format!("{t} = tensors[{}]", i + 1));
    }
    out.line(1, "if which_net === nothing");
    out.line(2, &format!("which_net = {}", ir.default_net));
    out.line(1, "end");
    for n in &ir.networks {
        out.line(1, &format!("if which_net == {}", n.network));
        out.line(2, "if which_env == 0");
        out.line(3, &format!("return {}", ncon_call(Dialect::Julia, syn, &n.call)));
        out.line(2, "end");
        for e in &n.envs {
            out.line(2, &format!("if which_env == {}", e.m));
            out.line(3, &format!("return {}", ncon_call(Dialect::Julia, syn, &e.call)));
            out.line(2, "end");
        }
        let msg = if n.envs.is_empty() {
            open_env_message(n)
        } else {
            env_range_message(n)
        };
        out.line(2, &format!("error(\"{msg}\")"));
        out.line(1, "end");
    }
    out.line(1, &format!("error(\"which_net must be one of {}\")", net_list(ir)));
    out.line(0, "end");
}

/// Source text of the generated function. Identical IR gives identical bytes.
pub fn emit(ir: &ContractionProgramIR, dialect: Dialect) -> String {
    let syn = Syntax::of(dialect);
    let mut out = Out {
        text: String::new(),
        indent: syn.indent,
    };
    header(ir, dialect, &syn, &mut out);
    match dialect {
        Dialect::Python => emit_python(ir, &syn, &mut out),
        Dialect::Matlab => emit_matlab(ir, &syn, &mut out),
        Dialect::Julia => emit_julia(ir, &syn, &mut out),
    }
    out.text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analyze_project, AnalysisOptions};
    use crate::builder::ProjectBuilder;
    use crate::codegen::build_ir;

    fn matmul_ir() -> ContractionProgramIR {
        let mut b = ProjectBuilder::new().index_type("d", 2);
        let x = b.tensor(Some("A"), 2, 1);
        let y = b.tensor(Some("B"), 2, 1);
        b.open(1, (x, 1), 1);
        b.link(1, (x, 2), (y, 1));
        b.open(1, (y, 2), 2);
        let an = analyze_project(&b.build(), &AnalysisOptions::default()).unwrap();
        build_ir(&an, "matmul").unwrap()
    }

    #[test]
    fn one_call_per_dialect() {
        let ir = matmul_ir();
        let expected = [
            (Dialect::Python, "ncon([A, B], [[-1, 1], [1, -2]], [1])"),
            (Dialect::Matlab, "ncon({A, B}, {[-1, 1], [1, -2]}, [1])"),
            (Dialect::Julia, "ncon(Any[A, B], [[-1, 1], [1, -2]]; order = [1])"),
        ];
        for (d, call) in expected {
            let src = emit(&ir, d);
            assert_eq!(src.matches("ncon(").count(), 1, "{d}");
            assert!(src.contains(call), "{d}:\n{src}");
            assert!(!src.contains('\r'));
            assert_eq!(src, emit(&ir, d));
        }
    }

    #[test]
    fn python_imports_numpy_only_for_identities() {
        let src = emit(&matmul_ir(), Dialect::Python);
        assert!(!src.contains("numpy"));
        assert!(src.contains("from ncon import ncon"));
        assert!(src.contains("def matmul(tensors, which_net=None, which_env=0):"));
    }

    #[test]
    fn header_lists_tensors_once() {
        let src = emit(&matmul_ir(), Dialect::Matlab);
        assert!(src.starts_with("% matmul(tensors, which_net, which_env)\n"));
        assert_eq!(src.matches("tensors = {A, B}").count(), 1);
    }
}
