use serde_json::Value;
use std::process::{Command, Output};

fn bcmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcmod"))
        .args(args)
        .env_remove("BCMOD_TOL")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = bcmod(args);
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|_| serde_json::from_slice(&out.stderr).unwrap());
    (code, v)
}

fn check_names(v: &Value) -> Vec<String> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn ba_xi_reports_normalization() {
    let (code, v) = report(&["ba", "xi", "--smax", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], true);
    assert_eq!(v["xi"].as_array().unwrap().len(), 5);
    assert_eq!(check_names(&v), ["xi.normalized_at_basepoint", "xi.eigen_equation"]);
}

#[test]
fn commutant_build_writes_q_and_a() {
    let dir = std::env::temp_dir().join(format!("bcmod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let q = dir.join("q.json");
    let a = dir.join("a.json");
    let (code, v) = report(&[
        "commutant", "build", "--principal", "[1,0,0,0]", "--weight", "3",
        "--q-out", q.to_str().unwrap(), "--a-out", a.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{v}");
    let qj: Value = serde_json::from_str(&std::fs::read_to_string(&q).unwrap()).unwrap();
    assert_eq!(qj["order"], 3);
    let aj: Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(aj["m"], 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_principal_is_a_usage_error() {
    let (code, v) = report(&["commutant", "build", "--principal", "[1,0,0]", "--order", "3"]);
    assert_eq!(code, 2);
    assert_eq!(v["exit_code"], 2);
    let (code, _) = report(&["commutant", "build", "--principal", "not json"]);
    assert_eq!(code, 2);
}

#[test]
fn unrealizable_principal_is_a_verification_failure() {
    let (code, v) = report(&["commutant", "build", "--b", "6", "--principal", "[1,0,0,0,0,0]", "--weight", "5"]);
    assert_eq!(code, 1, "{v}");
    assert!(v["error"].as_str().unwrap().contains("not realizable"));
    let (code, v) = report(&[
        "curve", "compute", "--b", "6", "--principal", "[1,0,0,0,0,0]", "--weight", "5", "--complete",
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["genus"]["varpi"], 2);
}

#[test]
fn dim_matches_graded_ring() {
    let (code, v) = report(&["commutant", "dim", "--K", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["dim"], 1);
    let (_, v) = report(&["commutant", "dim", "--K", "12", "--M-cap", "12"]);
    assert!(v["dim"].as_u64().unwrap() >= 2);
}

#[test]
fn curve_roundtrip_through_genus() {
    let path = std::env::temp_dir().join(format!("bcmod-curve-{}.json", std::process::id()));
    let (code, v) = report(&["curve", "compute", "--omega", "0.5+i", "--curve-out", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["curve"]["N"], 2);
    let (code, v) = report(&["curve", "genus", "--curve", path.to_str().unwrap(), "--coprime"]);
    assert_eq!(code, 0);
    assert_eq!(v["genus"]["varpi"], 1);
    assert_eq!(v["single_valued_criterion"], true);
    let (code, v) = report(&["curve", "verify-bc", "--curve", path.to_str().unwrap(), "--omega", "0.5+i"]);
    assert_eq!(code, 0, "{v}");
    // the same curve against a different lattice fails the identity
    let (code, _) = report(&["curve", "verify-bc", "--curve", path.to_str().unwrap(), "--omega", "2i"]);
    assert_eq!(code, 1);
    std::fs::remove_file(&path).ok();
}

#[test]
fn modular_weights() {
    for (q, w) in [("wp", "2"), ("g2", "4"), ("g3", "6"), ("xi2", "2")] {
        let (code, v) = report(&["modular", "verify-weight", "--quantity", q, "--weight", w, "--alpha", "S"]);
        assert_eq!(code, 0, "{q}: {v}");
    }
    // wrong weight is a verification failure, not an error
    let (code, _) = report(&["modular", "verify-weight", "--quantity", "wp", "--weight", "4", "--alpha", "S"]);
    assert_eq!(code, 1);
    let (code, _) = report(&["modular", "verify-weight", "--quantity", "nope", "--weight", "4"]);
    assert_eq!(code, 2);
}

#[test]
fn monodromy_run_on_a_lattice_point_loop() {
    let path = std::env::temp_dir().join(format!("bcmod-loop-{}.json", std::process::id()));
    let verts: Vec<[f64; 2]> = (0..=48)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k % 48) as f64 / 48.0;
            [0.25 * t.cos(), 0.25 * t.sin()]
        })
        .collect();
    std::fs::write(&path, serde_json::json!({ "vertices": verts }).to_string()).unwrap();
    let (code, v) = report(&[
        "monodromy", "run", "--X", "2", "--loop", path.to_str().unwrap(), "--principal", "[1,0,0,0]", "--weight", "3",
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["permutation"]["perm"], serde_json::json!([0, 1]));
    let (code, _) = report(&["monodromy", "run", "--b", "0.75", "--X", "2", "--loop", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_all_preset() {
    let csv = std::env::temp_dir().join(format!("bcmod-report-{}.csv", std::process::id()));
    let (code, v) = report(&["verify", "all", "--preset", "lame", "--omega", "i", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["runs"].as_array().unwrap().len(), 1);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().count() > 40);
    std::fs::remove_file(&csv).ok();
    let (code, _) = report(&["verify", "all", "--preset", "nope"]);
    assert_eq!(code, 2);
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_bcmod"))
        .args(["ba", "xi", "--smax", "2"])
        .env("BCMOD_TOL", "-3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
