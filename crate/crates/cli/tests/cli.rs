use std::io::Write;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str]) -> (Value, i32) {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_steiner-local")).args(args).output().expect("binary runs");
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    });
    (v, out.status.code().expect("exit code"))
}

fn temp_json(name: &str, v: &Value) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("steiner-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    let mut f = std::fs::File::create(&p).unwrap();
    f.write_all(v.to_string().as_bytes()).unwrap();
    p
}

#[test]
fn count_parens_example() {
    let (v, code) = run(&["count-parens", "--k", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"], json!({ "rooted": 105, "unrooted": 15 }));
    assert_eq!(v["command"], "count-parens");
}

#[test]
fn l1l2_example() {
    let (v, code) = run(&["l1l2-check", "--n", "2", "--lambda", "7/2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["steiner_star_2n"], json!(false));
    let (v, _) = run(&["l1l2-check", "--n", "2", "--lambda", "2+sqrt(2)", "--validate"]);
    assert_eq!(v["result"]["steiner_star_2n"], json!(true));
    assert_eq!(v["validation"]["agrees"], json!(true));
}

#[test]
fn input_errors_exit_one() {
    let (v, code) = run(&["count-parens"]);
    assert_eq!(code, 1);
    assert!(v["error"].as_str().unwrap().contains("--k"));

    let (v, code) = run(&["verify-node", "--space", "z:3", "--points", "/nonexistent/points.json"]);
    assert_eq!(code, 1);
    assert!(v["error"].is_string());

    // Coordinates of a Z point must sum to zero.
    let p = temp_json("bad.json", &json!([["1", "0", "0", "0"]]));
    let (_, code) = run(&["verify-node", "--space", "z:3", "--points", p.to_str().unwrap()]);
    assert_eq!(code, 1);

    let (_, code) = run(&["max-degree", "--n", "1"]);
    assert_eq!(code, 1);
}

#[test]
fn report_has_stable_shape() {
    let (v, code) = run(&["max-degree", "--n", "4", "--validate"]);
    assert_eq!(code, 0);
    for field in ["command", "verdicts", "result", "validation", "timing", "version"] {
        assert!(v.get(field).is_some(), "missing {field}");
    }
    assert_eq!(v["result"]["max_degree"], json!(20));
    assert_eq!(v["validation"]["agrees"], json!(true));
}

#[test]
fn reruns_agree_apart_from_timing() {
    let p = temp_json("linf.json", &json!([["1", "0"], ["0", "1"], ["-1", "-1"]]));
    let args = ["oracle", "--space", "linf:2", "--points", p.to_str().unwrap()];
    let (mut a, _) = run(&args);
    let (mut b, _) = run(&args);
    a.as_object_mut().unwrap().remove("timing");
    b.as_object_mut().unwrap().remove("timing");
    assert_eq!(a, b);
}

#[test]
fn extremal_star_round_trip() {
    let (fam, code) = run(&["extremal-family", "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(fam["result"]["size"], json!(10));
    let points = fam["result"]["points"].clone();
    let star = json!({ "space": { "kind": "z", "n": 3 }, "points": points });
    let p = temp_json("extremal.json", &star);
    let (v, code) = run(&["verify-node", "--input", p.to_str().unwrap(), "--validate"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["is_smt"], json!(true));
    assert_eq!(v["validation"]["routes_agree"], json!(true));

    let (s, code) = run(&["z-criterion", "--input", temp_json("sets.json", &json!({
        "m": 4, "sets": fam["result"]["sets"] })).to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(s["result"]["is_smt"], json!(true));

    // A further ray on another face breaks it.
    let mut more = points.as_array().unwrap().clone();
    more.push(json!(["-1/2", "-1/2", "-1/2", "3/2"]));
    let p = temp_json("extremal_plus.json", &json!({ "space": { "kind": "z", "n": 3 }, "points": more }));
    let (v, _) = run(&["verify-node", "--input", p.to_str().unwrap(), "--route", "lp"]);
    let (w, _) = run(&["verify-node", "--input", p.to_str().unwrap(), "--route", "criterion"]);
    assert_eq!(v["result"]["is_smt"], w["result"]["is_smt"]);
}

#[test]
fn l1l2_degree_bound() {
    let pts = json!([["1", "0"], ["0", "1"], ["1", "1"], ["-1", "0"], ["0", "-1"]]);
    let star = json!({ "space": { "kind": "l1l2", "n": 2, "lambda": "1/2" }, "points": pts });
    let p = temp_json("l1l2.json", &star);
    let (v, code) = run(&["verify-node", "--input", p.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["bound"]["verdict"], json!("not_smt"));
}

#[test]
fn text_format() {
    let out = Command::new(env!("CARGO_BIN_EXE_steiner-local"))
        .args(["count-parens", "--k", "4", "--format", "text"])
        .output()
        .unwrap();
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("rooted: 15"));
    assert!(s.contains("unrooted: 3"));
}

#[test]
fn shipped_data_files() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data");
    let (v, code) = run(&["verify-node", "--space", "z:3", "--points", &format!("{data}/extremal_z3.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["is_smt"], json!(true));
    let (v, code) = run(&["oracle", "--input", &format!("{data}/facet_triple.json"), "--validate"]);
    assert_eq!(code, 0);
    assert_eq!(v["validation"]["exact_length"], json!("5/2"));
    assert!(v["result"]["smt_length"].as_f64().unwrap() <= 2.5 + 1e-6);
}
