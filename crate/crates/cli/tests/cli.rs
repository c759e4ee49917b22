use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn ttc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttc")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn structured(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "structured"];
    all.extend_from_slice(args);
    let out = ttc(&all);
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}: {}", String::from_utf8_lossy(&out.stdout)));
    (code(&out), v)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes_follow_input_class() {
    for cmd in ["validate", "analyze"] {
        assert_eq!(code(&ttc(&[cmd, path(&fixture("matrix_chain.tnp"))])), 0, "{cmd}");
        assert_eq!(code(&ttc(&[cmd, path(&fixture("invalid_unwired.tnp"))])), 1, "{cmd}");
        assert_eq!(
            code(&ttc(&[cmd, path(&fixture("malformed_truncated.tnp"))])),
            2,
            "{cmd}"
        );
    }
    assert_eq!(code(&ttc(&["analyze", "/nonexistent/file.tnp"])), 2);
}

#[test]
fn structured_analysis_keys_are_stable() {
    let top = [
        "dims",
        "env_search",
        "errors",
        "generator",
        "mode",
        "networks",
        "schema",
        "seed",
        "valid",
    ];
    let per_net = [
        "closed",
        "environments",
        "errors",
        "guaranteed_optimal",
        "network",
        "open_indices",
        "order",
        "search_error",
        "tensors",
        "time_estimate_s",
        "top_costs",
        "total_mults",
        "valid",
    ];
    for name in [
        "matrix_chain.tnp",
        "six_closed.tnp",
        "invalid_unwired.tnp",
        "binary_mera.tnp",
    ] {
        let (_, v) = structured(&["analyze", path(&fixture(name))]);
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, top, "{name}");
        assert_eq!(v["schema"], "ttc.analysis/1");
        for n in v["networks"].as_array().unwrap() {
            let keys: Vec<&str> = n.as_object().unwrap().keys().map(String::as_str).collect();
            assert_eq!(keys, per_net, "{name}");
        }
    }
}

#[test]
fn invalid_and_malformed_structured_output() {
    let (c, v) = structured(&["analyze", path(&fixture("invalid_unwired.tnp"))]);
    assert_eq!(c, 1);
    assert_eq!(v["valid"], false);
    assert!(v["networks"][0]["total_mults"].is_null());

    let (c, v) = structured(&["analyze", path(&fixture("malformed_truncated.tnp"))]);
    assert_eq!(c, 2);
    assert_eq!(v["error"], "parse");
    assert!(v["errors"][0]["message"].as_str().unwrap().contains("line"));
}

#[test]
fn matrix_chain_text_report() {
    let out = ttc(&["analyze", path(&fixture("matrix_chain.tnp"))]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("total multiplications: 54"), "{text}");
}

#[test]
fn dim_overrides_scale_the_cost() {
    // matmul with every index of dimension d costs d^3
    for d in [2u64, 3, 7] {
        let spec = format!("d={d}");
        let (c, v) = structured(&["analyze", path(&fixture("matmul.tnp")), "--dims", &spec]);
        assert_eq!(c, 0);
        assert_eq!(v["networks"][0]["total_mults"], (d * d * d).to_string());
        assert_eq!(v["dims"]["d"], d);
    }
    let (c, v) = structured(&["analyze", path(&fixture("matmul.tnp")), "--dims", "nope=3"]);
    assert_eq!(c, 2);
    assert_eq!(v["errors"][0]["path"], "dims.nope");
    assert_eq!(
        code(&ttc(&["analyze", path(&fixture("matmul.tnp")), "--dims", "d=x"])),
        2
    );
}

#[test]
fn export_writes_named_function() {
    let dir = tempfile::tempdir().unwrap();
    for (lang, ext, sig) in [
        ("python", "py", "def my_net(tensors, which_net=None, which_env=0):"),
        ("matlab", "m", "function out = my_net(tensors, which_net, which_env)"),
        (
            "julia",
            "jl",
            "function my_net(tensors, which_net=nothing, which_env=0)",
        ),
    ] {
        let out = dir.path().join(format!("my-net.{ext}"));
        let o = ttc(&[
            "export",
            path(&fixture("six_closed.tnp")),
            "--lang",
            lang,
            "-o",
            path(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains(sig), "{lang}:\n{text}");
    }
    let out = dir.path().join("x.rs");
    assert_eq!(
        code(&ttc(&[
            "export",
            path(&fixture("matmul.tnp")),
            "--lang",
            "rust",
            "-o",
            path(&out)
        ])),
        2
    );
    let out = dir.path().join("bad.py");
    assert_eq!(
        code(&ttc(&[
            "export",
            path(&fixture("invalid_unwired.tnp")),
            "--lang",
            "python",
            "-o",
            path(&out)
        ])),
        1
    );
    assert!(!out.exists());
}

#[test]
fn export_matches_golden_files() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("binary_mera.py");
    assert_eq!(
        code(&ttc(&[
            "export",
            path(&fixture("binary_mera.tnp")),
            "--lang",
            "py",
            "-o",
            path(&out)
        ])),
        0
    );
    assert_eq!(
        std::fs::read(&out).unwrap(),
        std::fs::read(golden.join("binary_mera.py")).unwrap()
    );
}

#[test]
fn contract_matmul() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("t.json");
    std::fs::write(
        &data,
        r#"{"tensors": {"A": {"shape": [2, 2], "data": [1, 2, 3, 4]}, "B": {"shape": [2, 2], "data": [5, 6, 7, 8]}}}"#,
    )
    .unwrap();
    let out = ttc(&["contract", path(&fixture("matmul.tnp")), "--tensors", path(&data)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["shape"], serde_json::json!([2, 2]));
    assert_eq!(v["data"], serde_json::json!([19.0, 22.0, 43.0, 50.0]));

    // open networks have no environments
    let (c, v) = structured(&[
        "contract",
        path(&fixture("matmul.tnp")),
        "--env",
        "1",
        "--tensors",
        path(&data),
    ]);
    assert_eq!(c, 1);
    assert_eq!(v["code"], "E_ENV_OPEN_NETWORK");

    // positional tensors in unique order, with a wrong shape
    std::fs::write(
        &data,
        r#"{"tensors": [{"shape": [2, 3], "data": [1, 2, 3, 4, 5, 6]}, {"shape": [2, 2], "data": [1, 0, 0, 1]}]}"#,
    )
    .unwrap();
    let (c, v) = structured(&["contract", path(&fixture("matmul.tnp")), "--tensors", path(&data)]);
    assert_eq!(c, 1);
    assert_eq!(v["code"], "E_SHAPE_MISMATCH");

    let (c, _) = structured(&[
        "contract",
        path(&fixture("matmul.tnp")),
        "--budget",
        "7",
        "--tensors",
        path(&data),
    ]);
    assert_eq!(c, 1);
}
