use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pinned(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinned"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

const COLLINEAR: &str =
    r#"{ "dimension": 1, "centers": [[0], [2], [4]], "velocities": [[0.7071067811865476], [0], [-0.7071067811865476]] }"#;

#[test]
fn overlapping_config_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", r#"{ "dimension": 2, "centers": [[0, 0], [3, 0], [1.5, 0.5]] }"#);
    let out = pinned(&["validate", p.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("balls 1 and 3 overlap"), "{err}");
}

#[test]
fn malformed_file_is_a_usage_error_with_schema() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "x.json", r#"{ "dimension": 1, "centres": [[0]] }"#);
    let out = pinned(&["validate", p.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"centers\""));
    let out = pinned(&["no-such-command"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_lists_one_based_contacts() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "c.json", COLLINEAR);
    let out = pinned(&["validate", p.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["report"]["contacts"], serde_json::json!([[1, 2], [2, 3]]));
    assert_eq!(v["report"]["tree"], true);
    assert_eq!(v["manifest"]["inputs"][0], p.to_str().unwrap());
}

#[test]
fn bound_two_balls() {
    let dir = TempDir::new().unwrap();
    let out = pinned(&["bound", "--n", "2", "--d", "1", "--alpha", "1", "--tau", "value:2"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["report"]["log2"].as_f64().unwrap() - 15.5).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&out.stderr).contains("15.5"));
}

#[test]
fn bound_rejects_bad_alpha() {
    let dir = TempDir::new().unwrap();
    let out = pinned(&["bound", "--n", "3", "--d", "2", "--alpha", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = pinned(&["bound", "--n", "3", "--tau", "sometimes"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bound_from_configuration() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "c.json", COLLINEAR);
    let out = pinned(&["bound", "--alpha-from", p.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["report"]["n"], 3);
    assert_eq!(v["report"]["alpha_source"], "exhaustive");
    assert!((v["report"]["alpha"].as_f64().unwrap() - 0.75f64.sqrt()).abs() < 1e-12);
}

#[test]
fn simulate_writes_trace() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.json", COLLINEAR);
    let s = write(&dir, "s.json", r#"{ "kind": "explicit", "edges": [[1, 2], [2, 3], [1, 2], [2, 3]] }"#);
    let out = pinned(&["simulate", c.to_str().unwrap(), s.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["report"]["collisions"], 3);
    let trace = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    let lines: Vec<Value> = trace.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3]["changed"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Λ = 3"));
}

#[test]
fn simulate_rejects_foreign_edge() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.json", COLLINEAR);
    let s = write(&dir, "s.json", r#"{ "kind": "explicit", "edges": [[1, 3]] }"#);
    let out = pinned(&["simulate", c.to_str().unwrap(), s.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn search_witness_replays_through_simulate() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.json", COLLINEAR);
    let out = pinned(&["search", c.to_str().unwrap()], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    let best = v["report"]["result"]["best"].as_u64().unwrap();
    assert_eq!(best, 3);
    assert_eq!(v["report"]["replays"], true);
    assert_eq!(v["report"]["result"]["bound"]["within"], true);
    let sched = write(&dir, "w.json", &v["report"]["replay_schedule"].to_string());
    let out = pinned(&["simulate", c.to_str().unwrap(), sched.to_str().unwrap()], dir.path());
    assert_eq!(json(&out)["report"]["collisions"].as_u64(), Some(best));
}

#[test]
fn random_state_seed_is_recorded() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.json", r#"{ "dimension": 1, "centers": [[0], [2], [4]] }"#);
    let a = json(&pinned(&["search", c.to_str().unwrap()], dir.path()));
    let seed = a["manifest"]["seeds"]["initial_state"].as_u64().expect("seed recorded");
    let b = json(&pinned(&["search", c.to_str().unwrap(), "--seed", &seed.to_string()], dir.path()));
    assert_eq!(a["report"]["normalized_state"], b["report"]["normalized_state"]);
    assert_eq!(a["report"]["result"]["best"], b["report"]["result"]["best"]);
}

#[test]
fn alpha_report() {
    let dir = TempDir::new().unwrap();
    let c = write(&dir, "c.json", r#"{ "dimension": 1, "centers": [[0], [2]] }"#);
    let v = json(&pinned(&["alpha", c.to_str().unwrap()], dir.path()));
    assert_eq!(v["report"]["alpha"], 1.0);
    assert_eq!(v["report"]["argmin_edge"], serde_json::json!([1, 2]));
}

#[test]
fn orbit_from_file_and_adversarial() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "h.json",
        r#"{ "normals": [[0, 1], [1, 1]], "start": [0, -1], "witness": [0.1, 1], "policy": { "kind": "periodic", "word": [2, 1] } }"#,
    );
    let out = pinned(&["orbit", f.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["report"]["folds"].as_array().unwrap().iter().all(|i| i.as_u64().unwrap() >= 1));
    let v = json(&pinned(&["orbit", "--adversarial", "100", "--summary"], dir.path()));
    assert!(v["report"]["size"].as_u64().unwrap() > 100);
    assert!(v["report"].get("points").is_none());
}

#[test]
fn lattice_certificates() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "l.json", r#"{ "points": [[0, 0], [2, 0]] }"#);
    let v = json(&pinned(&["lattice", f.to_str().unwrap()], dir.path()));
    let cert = &v["report"]["certificates"][0];
    assert!((cert["lower_bound"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert_eq!(cert["in_span"], false);
    let f = write(&dir, "r.json", r#"{ "points": [[0, 0], [2, 0], [1, 1], [3, 1]] }"#);
    let out = pinned(&["lattice", f.to_str().unwrap(), "--edge-set", "1-2,1-3", "--edge", "1-2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["report"]["edge_set"], serde_json::json!([[1, 2], [1, 3]]));
    assert_eq!(v["report"]["certificates"].as_array().unwrap().len(), 1);
    let out = pinned(&["lattice", f.to_str().unwrap(), "--edge-set", "1-2,1-4"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let f = write(&dir, "bad.json", r#"{ "points": [[0, 1]] }"#);
    assert_eq!(pinned(&["lattice", f.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn verify_single_criterion_to_file() {
    let dir = TempDir::new().unwrap();
    let out = pinned(&["verify", "--quick", "--criterion", "8", "--seed", "1", "--out", "v.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["passed"], true);
    assert_eq!(v["manifest"]["seeds"]["verify"], 1);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("PASS criterion  8"));
}

#[test]
fn documented_examples_run() {
    let ex = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples");
    let dir = TempDir::new().unwrap();
    let p = |name: &str| ex.join(name).to_str().unwrap().to_string();
    let runs: [Vec<String>; 6] = [
        vec!["validate".into(), p("triangle.json")],
        vec!["simulate".into(), p("collinear.json"), p("schedule.json")],
        vec!["simulate".into(), p("triangle.json"), p("round_robin.json")],
        vec!["orbit".into(), p("halfplanes.json")],
        vec!["lattice".into(), p("rhombus.json")],
        vec!["alpha".into(), p("triangle.json")],
    ];
    for args in runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = pinned(&args, dir.path());
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        json(&out);
    }
    assert_eq!(pinned(&["validate", &p("overlap.json")], dir.path()).status.code(), Some(1));
}
