use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_suq2-bmo"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn haar_matches_geometric_series() {
    for q in [0.5f64, 0.3, -0.6] {
        let r = report(&["haar", "0 1 1", "--q", &q.to_string()]);
        let series: f64 = (1.0 - q * q) * (0..500).map(|k| (q * q).powi(2 * k)).sum::<f64>();
        let v = r["result"]["value"].as_f64().unwrap();
        assert!((v - series).abs() < 1e-14, "q = {q}: {v} vs {series}");
        assert_eq!(r["config"]["q"].as_f64(), Some(q));
    }
    assert_eq!(report(&["haar", "0 0 0"])["result"]["value"].as_f64(), Some(1.0));
    assert_eq!(report(&["haar", "1 0 0"])["result"]["value"].as_f64(), Some(0.0));
}

#[test]
fn haar_parse_error_exits_2() {
    let out = run(&["haar", "0 1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("parse error"), "{}", stderr(&out));
}

#[test]
fn peterweyl_spin_half_matrix() {
    let r = report(&["peterweyl", "1/2", "--cross", "1"]);
    let m = &r["result"]["matrix"];
    assert_eq!(m[0][0], "(1) * 1 0 0");
    assert_eq!(m[0][1], "(-q) * 0 0 1");
    assert_eq!(m[1][0], "(1) * 0 1 0");
    assert_eq!(m[1][1], "(1) * -1 0 0");
    assert_eq!(r["result"]["orthogonality"]["delta_pattern"], true);
    assert_eq!(r["result"]["cross"]["nonzero_entries"], 0);
    assert_eq!(r["passed"], true);

    let r = report(&["peterweyl", "0"]);
    assert_eq!(r["result"]["matrix"][0][0], "(1) * 0 0 0");
}

#[test]
fn peterweyl_refuses_large_spin() {
    let out = run(&["peterweyl", "7/2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
}

#[test]
fn multiplier_bound_holds() {
    let r = report(&["multiplier", "--symbol", "table:1=2,-1=1+1i,default=0.5", "--l-max", "1", "--q", "0.3"]);
    let b = &r["result"]["bound"];
    assert_eq!(b["holds"], true);
    let norm = b["norm"].as_f64().unwrap();
    assert!((norm - 2.0).abs() < 1e-8, "{norm}");
}

#[test]
fn bmo_closed_forms() {
    let r = report(&["bmo", "--semigroup", "depolarizing", "--element", "1 0; 0 -1"]);
    assert!((r["result"]["norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let r = report(&["bmo", "--semigroup", "depolarizing", "--element", "0 0; 0 0"]);
    assert_eq!(r["result"]["norm"].as_f64(), Some(0.0));
    let r = report(&["bmo", "--semigroup", "torus", "--element", "1:1"]);
    assert!((r["result"]["norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn bmo_interior_supremum() {
    // x = diag(−0.01, 0.99) with φ = diag(0.99, 0.01): the profile is
    // (1 − s)² (0.99² s + φ(x*x)(1 − s)) in s = e^{−t}
    let r = report(&["bmo", "--semigroup", "depolarizing", "--density", "99,1", "--element", "-0.01 0; 0 0.99"]);
    let (xx, phi) = (0.9801, 0.99 * 1e-4 + 0.01 * 0.9801);
    let grid = r["config"]["t_grid"].clone();
    let (a, b, n) = (grid["t_min"].as_f64().unwrap(), grid["t_max"].as_f64().unwrap(), grid["count"].as_u64().unwrap());
    let best = (0..2 * n - 1)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (2 * n - 2) as f64).exp())
        .map(|t| {
            let s = (-t).exp();
            (1.0 - s) * (1.0 - s) * (xx * s + phi * (1.0 - s))
        })
        .fold(phi, f64::max)
        .sqrt();
    let norm = r["result"]["bmo"]["col"]["refined_norm"].as_f64().unwrap();
    assert!((norm - best).abs() < 1e-12, "{norm} vs {best}");
}

#[test]
fn bmo_refuses_non_mean_zero_with_hint() {
    let out = run(&["bmo", "--semigroup", "torus", "--element", "0:1 1:1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--project"), "{}", stderr(&out));
    let r = report(&["bmo", "--semigroup", "torus", "--element", "0:1 1:1", "--project"]);
    assert!((r["result"]["norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn unstable_grid_fails_with_exit_1() {
    let out = run(&[
        "bmo", "--semigroup", "depolarizing", "--density", "99,1", "--element", "-0.01 0; 0 0.99", "--t-grid", "0.01,50,2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], false);
    assert_eq!(r["result"]["bmo"]["col"]["stability_flag"], false);
}

#[test]
fn lp_trace_and_contraction() {
    let r = report(&["lp", "--element", "1 2; 0 1,1", "--density", "1,3", "--p", "1", "--z", "0.5"]);
    assert!(r["result"]["trace_defect"].as_f64().unwrap() < 1e-12);
    assert_eq!(r["result"]["contraction"], true);
}

#[test]
fn gnsmod_axioms_pass() {
    let r = report(&["gnsmod", "--map", "depolarizing:0.3", "--density", "1,2,3", "--p", "4", "--instances", "5"]);
    assert_eq!(r["passed"], true);
    assert!(r["result"]["worst"]["adjoint_symmetry"].as_f64().unwrap() < 1e-10);
}

#[test]
fn transfer_intertwines() {
    let r = report(&["transfer", "--element", "1 0 0 + 0.5 * 0 1 1", "--symbol", "heat:0.7"]);
    assert!(r["result"]["intertwine"]["defect"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn dilate_small_model_and_budget() {
    let r = report(&["dilate", "--element", "1 1 0", "--trunc-n", "4", "--trunc-m", "1", "--eps", "0.7"]);
    for c in r["result"]["checks"].as_array().unwrap() {
        assert!(c["identity"]["interior_defect"].as_f64().unwrap() <= 1e-8);
    }
    let out = run(&["dilate", "--element", "1 0 0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--trunc-n"), "{}", stderr(&out));
}

#[test]
fn verify_suites() {
    let r = report(&["verify", "relations"]);
    assert_eq!(r["passed"], true);
    let r = report(&["verify", "dilation", "--eps", "0.7"]);
    assert!(r["result"]["max_defect"].as_f64().unwrap() <= 1e-8);
    let r = report(&["verify", "transference"]);
    assert!(r["result"]["max_defect"].as_f64().unwrap() <= 1e-10);
    let r = report(&["verify", "all"]);
    assert_eq!(r["result"]["failed"].as_array().unwrap().len(), 0);
}

#[test]
fn unknown_suite_lists_names() {
    let out = run(&["verify", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    for name in ["relations", "gns-symmetry", "kadison-schwarz", "holder", "transference", "dilation"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn invalid_q_is_rejected() {
    for q in ["0", "1", "-1.5"] {
        let out = run(&["haar", "0 0 0", "--q", q]);
        assert_eq!(out.status.code(), Some(2), "q = {q}");
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(&path, "# shared settings\nq = 0.3\nseed = 7\n").unwrap();
    let p = path.to_str().unwrap();
    let r = report(&["haar", "0 1 1", "--config", p]);
    assert_eq!(r["config"]["q"].as_f64(), Some(0.3));
    assert_eq!(r["config"]["seed"].as_u64(), Some(7));
    let r = report(&["haar", "0 1 1", "--config", p, "--q", "0.6"]);
    assert_eq!(r["config"]["q"].as_f64(), Some(0.6));
    assert_eq!(r["config"]["seed"].as_u64(), Some(7));

    fs::write(&path, "colour = red\n").unwrap();
    assert_eq!(run(&["haar", "0 1 1", "--config", p]).status.code(), Some(2));
}

#[test]
fn replay_reproduces_report() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = run(&["gnsmod", "--instances", "4", "--seed", "11", "--out", first.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = run(&["--replay", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let a: Value = serde_json::from_str(&fs::read_to_string(&first).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&fs::read_to_string(&second).unwrap()).unwrap();
    assert_eq!(a["input_hash"], b["input_hash"]);
    assert_eq!(
        serde_json::to_string(&a["result"]).unwrap(),
        serde_json::to_string(&b["result"]).unwrap()
    );
    // a different seed changes both the hash and the draws
    let c = report(&["--replay", first.to_str().unwrap(), "--seed", "12"]);
    assert_ne!(a["input_hash"], c["input_hash"]);
}

#[test]
fn csv_output() {
    let out = run(&["bmo", "--semigroup", "depolarizing", "--element", "1 0; 0 -1", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("side,norm,argmax_t,refined_norm,relative_change,stable"));
    assert!(lines.next().unwrap().starts_with("col,1,"));
}

#[test]
fn help_documents_element_grammar() {
    let out = run(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("c * k l m"), "{text}");
    for cmd in ["haar", "peterweyl", "multiplier", "bmo", "lp", "gnsmod", "transfer", "dilate", "verify"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}
