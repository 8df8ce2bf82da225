use std::process::Command;

use ctxkit::json::{parse_inequality, InequalityJson};
use ctxkit_core::catalog::catalog_get;
use ctxkit_core::observables::build_peres_mermin;
use ctxkit_core::quantum::{evaluate_inequality, haar_state, make_state, NamedState, StateSpec};
use ctxkit_core::sim::run_protocol;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn ctxkit(args: &[&str], threads: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ctxkit"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("CTXKIT_THREADS", t),
        None => cmd.env_remove("CTXKIT_THREADS"),
    };
    let out = cmd.output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn results(args: &[&str]) -> Value {
    let r = ctxkit(args, None);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    v["results"].clone()
}

#[test]
fn documented_examples() {
    let r = results(&["certify", "--inequality", "ineq1"]);
    assert_eq!(r["classical_bound"], 7);
    assert_eq!(r["quantum_constant"], 9.0);
    assert_eq!(r["state_independent"], true);

    assert_eq!(results(&["bound", "--inequality", "chsh8"])["classical_bound"], 2);

    let v = results(&["quantum", "--inequality", "cfrh6", "--state", "singlet"])["value"].as_f64().unwrap();
    assert!((v - 5.0).abs() <= 1e-9);
}

#[test]
fn cli_matches_library_exactly() {
    let pm = build_peres_mermin().unwrap();
    let e = catalog_get("nambu7", None).unwrap();
    let rho = make_state(&StateSpec::Named(NamedState::YPlusPair), 4).unwrap();
    let lib = evaluate_inequality(&rho, &pm, &e).unwrap();
    let cli = results(&["quantum", "--inequality", "nambu7", "--state", "y_plus_pair"])["value"].as_f64().unwrap();
    assert_eq!(cli.to_bits(), lib.to_bits());

    let rho = haar_state(4, 0, 0).unwrap().density();
    let e = catalog_get("ineq4", None).unwrap();
    let lib = run_protocol(&rho, &pm, &e, 500, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    std::fs::write(&state, r#"{"kind":"haar","dim":4,"seed":0}"#).unwrap();
    let r = results(&[
        "simulate", "--inequality", "ineq4", "--state", state.to_str().unwrap(), "--shots", "500", "--seed", "3",
    ]);
    assert_eq!(r["lhs_estimate"].as_f64().unwrap().to_bits(), lib.lhs_estimate.to_bits());
    assert_eq!(r["lhs_stderr"].as_f64().unwrap().to_bits(), lib.lhs_standard_error.to_bits());
    assert_eq!(r["terms"].as_array().unwrap().len(), 6);
}

#[test]
fn exit_codes() {
    let r = ctxkit(&["bound", "--inequality", "nope"], None);
    assert_eq!(r.code, 2);
    let err: Value = serde_json::from_str(&r.stderr).unwrap();
    assert_eq!(err["error"], "not_found");
    assert!(r.stdout.is_empty());

    let r = ctxkit(&["quantum", "--inequality", "cfrh6", "--state", "no_such_state"], None);
    assert_eq!(r.code, 2);

    let r = ctxkit(&["quantum", "--inequality", "ineq9", "--n", "5", "--state", "singlet"], None);
    assert_eq!(r.code, 2, "wrong dimension");

    let r = ctxkit(&["bound", "--inequality", "ineq9", "--n", "13"], None);
    assert_eq!(r.code, 3);
    let err: Value = serde_json::from_str(&r.stderr).unwrap();
    assert_eq!(err["error"], "resource_limit");

    let r = ctxkit(&["frobnicate"], None);
    assert_eq!(r.code, 2);
}

#[test]
fn user_inequalities() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"id":"bad","set_id":"ks18","terms":[{"sign":1,"factors":["A12","A34"]}]}"#).unwrap();
    let r = ctxkit(&["certify", "--inequality", bad.to_str().unwrap()], None);
    assert_eq!(r.code, 2);
    let err: Value = serde_json::from_str(&r.stderr).unwrap();
    assert_eq!(err["error"], "invalid_context");

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    assert_eq!(ctxkit(&["bound", "--inequality", broken.to_str().unwrap()], None).code, 2);

    let good = dir.path().join("good.json");
    let e = catalog_get("kcbs3", None).unwrap();
    std::fs::write(&good, serde_json::to_string(&InequalityJson::from(&e)).unwrap()).unwrap();
    assert_eq!(results(&["bound", "--inequality", good.to_str().unwrap()])["classical_bound"], 3);
}

#[test]
fn specialize_reproduces_cfrh6() {
    let dir = tempfile::tempdir().unwrap();
    let subs = dir.path().join("subs.json");
    std::fs::write(&subs, r#"{"P16":-1,"P26":-1,"P36":-1}"#).unwrap();
    let r = results(&["specialize", "--inequality", "ineq4", "--subs", subs.to_str().unwrap()]);
    assert_eq!(r["dropped_constant"], 1);
    assert_eq!(r["classical_bound"], 3);
    let special = parse_inequality(&r["expression"].to_string()).unwrap();
    assert_eq!(special.term_multiset(), catalog_get("cfrh6", None).unwrap().term_multiset());

    std::fs::write(&subs, r#"{"Q99":1}"#).unwrap();
    let r = ctxkit(&["specialize", "--inequality", "ineq4", "--subs", subs.to_str().unwrap()], None);
    assert_eq!(r.code, 2);
}

#[test]
fn csv_tables() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim.csv");
    results(&[
        "simulate", "--inequality", "cfrh6", "--state", "singlet", "--shots", "100", "--seed", "1", "--csv",
        sim.to_str().unwrap(),
    ]);
    let mut rd = csv::Reader::from_path(&sim).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["term_index", "term", "estimate", "stderr", "shots"]);
    assert_eq!(rd.records().count(), 5);

    let sweep = dir.path().join("sweep.csv");
    let r = results(&[
        "sweep", "--inequality", "ineq4", "--states", "20", "--seed", "4", "--csv", sweep.to_str().unwrap(),
    ]);
    assert_eq!(r["count"], 20);
    let rows: Vec<f64> = csv::Reader::from_path(&sweep)
        .unwrap()
        .records()
        .map(|rec| rec.unwrap()[1].parse().unwrap())
        .collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|v| (v - 6.0).abs() <= 1e-9));
}

#[test]
fn colorability_report() {
    let r = results(&["colorability"]);
    assert_eq!(r["colorable"], false);
    assert_eq!(r["witness"], Value::Null);
    assert_eq!(r["context_count"], 9);
    assert_eq!(r["parity_contradiction"], true);
}

#[test]
fn seeded_reports_ignore_thread_count() {
    let runs: [&[&str]; 3] = [
        &["simulate", "--inequality", "ineq1", "--state", "paper_kcbs_product", "--shots", "300", "--seed", "9"],
        &["sweep", "--inequality", "kcbs3", "--states", "200", "--seed", "9"],
        &["bound", "--inequality", "ineq1"],
    ];
    for args in runs {
        let one = ctxkit(args, Some("1"));
        let many = ctxkit(args, Some("4"));
        let auto = ctxkit(args, Some("0"));
        assert_eq!(one.code, 0);
        assert_eq!(one.stdout, many.stdout, "{args:?}");
        assert_eq!(one.stdout, auto.stdout, "{args:?}");
    }
    let r = ctxkit(&["bound", "--inequality", "chsh8"], Some("lots"));
    assert_eq!(r.code, 2);
}
