use std::path::PathBuf;

use sepcert::cli::{run, CommandResult, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use sepcert::decomp::builtin_decomposition;
use sepcert::io;

fn sepcert(args: &[&str]) -> CommandResult {
    run(std::iter::once("sepcert").chain(args.iter().copied()))
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sepcert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn noisy_ghz3(p: f64) -> String {
    let d = (1.0 - p) / 8.0;
    let mut diag = [d; 8];
    diag[0] += p / 2.0;
    diag[7] += p / 2.0;
    serde_json::json!({ "diag": diag, "anti": [p / 2.0, 0.0, 0.0, 0.0] }).to_string()
}

#[test]
fn threshold_of_ghz4_witness() {
    let r = sepcert(&["threshold", "--witness", "ghz4-trisep", "--state", "ghz4"]);
    assert_eq!(r.exit_code, EXIT_PASS);
    assert_eq!(r.report.lines().next(), Some("0.2"));
    assert!(r.report.contains("exact 1/5"));
}

#[test]
fn charfn_of_maximally_mixed_state() {
    let f = scratch("mixed.json", r#"{"n": 2, "format": "pauli", "pauli": [{"string": "II", "coeff": 1.0}]}"#);
    let r = sepcert(&["--json", "charfn", f.to_str().unwrap()]);
    assert_eq!(r.exit_code, EXIT_PASS);
    let v: serde_json::Value = serde_json::from_str(&r.report).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["string"], "II");
    assert!((entries[0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn xcheck_exit_codes_follow_the_boundary() {
    let sep = scratch("x015.json", &noisy_ghz3(0.15));
    let ent = scratch("x025.json", &noisy_ghz3(0.25));
    assert_eq!(sepcert(&["xcheck", sep.to_str().unwrap()]).exit_code, EXIT_PASS);
    let r = sepcert(&["--json", "xcheck", ent.to_str().unwrap()]);
    assert_eq!(r.exit_code, EXIT_FAIL);
    let v: serde_json::Value = serde_json::from_str(&r.report).unwrap();
    assert_eq!(v["verdict"], "entangled");
}

#[test]
fn xcheck_accepts_dense_state_files() {
    let rho = sepcert::graph::named_pure_state("ghz3").unwrap();
    let f = scratch("ghz3.json", &io::state_to_json(&rho));
    assert_eq!(sepcert(&["xcheck", f.to_str().unwrap()]).exit_code, EXIT_FAIL);
}

#[test]
fn malformed_input_is_exit_3() {
    let bad = scratch("bad.json", "{bad");
    assert_eq!(sepcert(&["charfn", bad.to_str().unwrap()]).exit_code, EXIT_INPUT);
    assert_eq!(sepcert(&["charfn", "/no/such/file"]).exit_code, EXIT_INPUT);
    let not_psd = scratch("neg.json", r#"{"n": 1, "format": "pauli", "pauli": [{"string": "I", "coeff": 1.0}, {"string": "Z", "coeff": 2.0}]}"#);
    assert_eq!(sepcert(&["charfn", not_psd.to_str().unwrap()]).exit_code, EXIT_INPUT);
    assert_eq!(sepcert(&["bank", "show", "nope"]).exit_code, EXIT_INPUT);
    assert_eq!(sepcert(&["no-such-command"]).exit_code, EXIT_INPUT);
}

#[test]
fn bank_list_and_show() {
    let r = sepcert(&["bank", "list"]);
    assert_eq!(r.exit_code, EXIT_PASS);
    for (id, t) in [("ghz4-trisep", "1/5"), ("cluster4-fullsep", "1/9"), ("cluster4-trisep", "5/21")] {
        let line = r.report.lines().find(|l| l.starts_with(id)).unwrap();
        assert!(line.contains(t), "{line}");
    }
    let show = sepcert(&["bank", "show", "cluster4-trisep"]);
    assert_eq!(show.exit_code, EXIT_PASS);
    assert_ne!(show.report, sepcert(&["bank", "show", "cluster4-trisep", "--raw"]).report);
}

#[test]
fn verify_decomp_on_a_builtin() {
    let b = builtin_decomposition("ghz4-trisep").unwrap();
    let d = scratch("decomp.json", &io::decomposition_to_json(&b.decomposition));
    let s = scratch("target.json", &io::state_to_json(&b.target));
    let r = sepcert(&["verify-decomp", d.to_str().unwrap(), s.to_str().unwrap(), "--class", "tri"]);
    assert_eq!(r.exit_code, EXIT_PASS, "{}", r.report);
    let wrong = sepcert(&["verify-decomp", d.to_str().unwrap(), "ghz4", "--class", "tri"]);
    assert_eq!(wrong.exit_code, EXIT_FAIL);
}

#[test]
fn bound_needs_a_class_for_witness_files() {
    let w = scratch("w.json", r#"{"n": 2, "terms": [{"string": "XX", "coeff": 1.0}, {"string": "ZZ", "coeff": 1.0}]}"#);
    assert_eq!(sepcert(&["bound", "--witness", w.to_str().unwrap()]).exit_code, EXIT_INPUT);
    let r = sepcert(&["--json", "bound", "--witness", w.to_str().unwrap(), "--class", "full"]);
    assert_eq!(r.exit_code, EXIT_PASS);
    let v: serde_json::Value = serde_json::from_str(&r.report).unwrap();
    assert!((v["bound"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}
