//! Shared inputs for the criterion benchmarks under `benches/`.

use std::path::Path;

use ttc_core::{compile_network, load_project, LabeledNetwork};

/// Compiled network `net` of a fixture in the workspace `fixtures/` directory.
pub fn fixture_network(name: &str, net: u8) -> LabeledNetwork {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let bytes = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let project = load_project(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
    compile_network(&project, net).unwrap_or_else(|e| panic!("{name} network {net}: {e}"))
}
