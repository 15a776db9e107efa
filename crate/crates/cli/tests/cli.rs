use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_gauge-tomo");

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn run(root: &Path, args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("GAUGE_TOMO_OUTPUT_ROOT", root).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

const BASE: &str = r#""name": "t", "grid": {"dim": 1, "points": 64, "half_width": 8.0},
    "state": {"type": "gaussian", "q0": [0.0], "p0": [0.0], "sigma": 1.0}"#;

fn report_of(root: &Path, name: &str) -> serde_json::Value {
    let dir = std::fs::read_dir(root.join(name)).unwrap().next().unwrap().unwrap().path();
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn bundled_gauge_invariance_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["run", scenario("gauge_invariance_1d").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report_of(tmp.path(), "gauge_invariance_1d");
    assert_eq!(r["status"], "pass");
    let d = r["tasks"][0]["metrics"]["two_gauge_l1_max"].as_f64().unwrap();
    assert!(d <= 1e-6, "{d:e}");
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn unknown_task_is_a_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!(r#"{{{BASE}, "tasks": [{{"task": "frobnicate"}}]}}"#));
    let out = run(tmp.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tasks[0].task"));
}

#[test]
fn empty_task_list_is_a_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!(r#"{{{BASE}, "tasks": []}}"#));
    let out = run(tmp.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tasks"));
}

#[test]
fn unresolvable_references_are_schema_errors() {
    let tmp = tempfile::tempdir().unwrap();
    // shift kernel without a gauge function
    let body = format!(
        r#"{{{BASE}, "tasks": [{{"task": "kernel_check", "kernel": "shift",
        "outputs": [{{"scheme": "symplectic", "mu": [1.0], "nu": [1.0]}}], "tolerance": 1e-8}}]}}"#
    );
    let out = run(tmp.path(), &["run", write_config(tmp.path(), &body).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let body = BASE.replace(r#""points": 64"#, r#""points": 64, "spacing": 0.2"#);
    let out = run(tmp.path(), &["run", write_config(tmp.path(), &format!(r#"{{{body}, "tasks": [{{"task": "reconstruct"}}]}}"#)).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerance_failure_exits_one_with_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{{BASE}, "potentials": {{"type": "polynomial", "a": [[{{"coeff": 0.5, "powers": [1]}}]]}},
        "gauge": {{"type": "linear", "a": [1.0]}},
        "tasks": [{{"task": "compute_tomogram", "kind": "ordinary",
        "params": [{{"scheme": "symplectic", "mu": [1.0], "nu": [1.0]}}], "max_change": 1e-6}}]}}"#
    );
    let out = run(tmp.path(), &["run", write_config(tmp.path(), &body).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAILED two_gauge_l1_max"), "{stdout}");
    assert_eq!(report_of(tmp.path(), "t")["status"], "fail");
}

#[test]
fn unknown_tag_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), &["check", "--tag", "none_matching"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["list", "--tag", "none_matching"]).status.code(), Some(2));
}

fn listed(tag: &str) -> BTreeSet<String> {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["list", "--tag", tag]);
    assert!(out.status.success());
    String::from_utf8_lossy(&out.stdout).lines().map(|l| l.split('\t').next().unwrap().to_string()).collect()
}

#[test]
fn tag_all_is_a_superset() {
    let all = listed("all");
    let mut union = BTreeSet::new();
    for tag in ["gauge", "reconstruction", "residual", "limit"] {
        let s = listed(tag);
        assert!(!s.is_empty(), "{tag}");
        assert!(s.is_subset(&all), "{tag}");
        union.extend(s);
    }
    assert_eq!(union, all);
    assert_eq!(listed("gauge").len(), 6);
}

#[test]
fn gauge_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["--threads", "1", "check", "--tag", "gauge"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("6 of 6 scenarios passed"), "{stdout}");
}

fn csv_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v = Vec::new();
    for hash_dir in std::fs::read_dir(root.join("linear_shift_kernel_1d")).unwrap() {
        let hash_dir = hash_dir.unwrap().path();
        for f in std::fs::read_dir(&hash_dir).unwrap() {
            let f = f.unwrap().path();
            if f.extension().is_some_and(|e| e == "csv") {
                v.push((f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&f).unwrap()));
            }
        }
    }
    v.sort();
    v
}

#[test]
fn csv_outputs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = scenario("linear_shift_kernel_1d");
    assert!(run(a.path(), &["run", cfg.to_str().unwrap()]).status.success());
    assert!(run(b.path(), &["--threads", "1", "run", cfg.to_str().unwrap()]).status.success());
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    assert_eq!(fa.len(), 3);
    assert_eq!(fa, fb);
    let first = String::from_utf8_lossy(&fa[0].1).lines().next().unwrap().to_string();
    assert!(first.starts_with("# config_hash="));
}

#[test]
fn bundled_scenarios_match_the_schema_file() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schema/scenario.schema.json")).unwrap();
    let top: BTreeSet<&str> = schema["properties"].as_object().unwrap().keys().map(|s| s.as_str()).collect();
    let tasks: BTreeSet<&str> = schema["definitions"]["task"]["oneOf"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["properties"]["task"]["const"].as_str().unwrap())
        .collect();
    for entry in std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")).unwrap() {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(entry.unwrap().path()).unwrap()).unwrap();
        for k in v.as_object().unwrap().keys() {
            assert!(top.contains(k.as_str()), "{k}");
        }
        for t in v["tasks"].as_array().unwrap() {
            assert!(tasks.contains(t["task"].as_str().unwrap()));
        }
    }
}
