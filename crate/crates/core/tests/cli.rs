use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_harnack-lab");

const TORUS: &str = r#"
schema_version = 1
name = "torus"

[background]
kind = "flat-torus"
n = 2
points = 32

[[flow]]
id = "g"
kind = "static-flat"
t_end = 0.5

[[heat]]
id = "f"
flow = "g"
direction = "forward-in-tau"
q = 2.0
data = { profile = "exp-affine", offset = 1.0, amplitude = 0.2, basis = "cos", mode = 1 }

[[monitor]]
quantity = "h2r"
heat = "f"
"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_file(dir: &Path, name: &str, text: &str, out: &str) -> Output {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    let out = dir.join(out);
    run(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

#[test]
fn list_shows_bundled_scenarios() {
    let out = run(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["torus-constant", "sphere-eps-family", "shrinking-sphere-path", "identities-torus"] {
        assert!(text.contains(name), "{name} missing from:\n{text}");
    }
}

#[test]
fn holding_scenario_exits_zero_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_file(dir.path(), "torus.toml", TORUS, "out");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out_dir = dir.path().join("out");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["summary"]["holds"], true);
    assert_eq!(json["monitors"][0]["report"]["verdict"]["status"], "holds");
    let series = &json["monitors"][0]["series_file"];
    let csv = std::fs::read_to_string(out_dir.join(series.as_str().unwrap())).unwrap();
    assert_eq!(csv.lines().next(), Some("time,sup_quantity,bound,margin"));
    assert!(csv.lines().count() > 10);
    assert!(out_dir.join("report.txt").exists());
}

#[test]
fn repeated_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        assert_eq!(run_file(dir.path(), "torus.toml", TORUS, out).status.code(), Some(0));
    }
    let mut names: Vec<_> = std::fs::read_dir(dir.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 3);
    for name in names {
        let a = std::fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&name)).unwrap();
        assert!(a == b, "{name:?} differs between runs");
    }
}

#[test]
fn tightened_bound_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = TORUS.replace("heat = \"f\"\n", "heat = \"f\"\nbound_shift = -100.0\n");
    let out = run_file(dir.path(), "tight.toml", &text, "out");
    assert_eq!(out.status.code(), Some(2));
    let report = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
    assert!(report.contains("\"violated\""));
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = TORUS.replace("t_end = 0.5", "t_end = 0.5\nspeed = 3");
    let out = run_file(dir.path(), "bad.toml", &unknown, "out");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));

    let out = run(&["run", "no-such-scenario"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unmet_hypothesis_is_reported() {
    let text = r#"
schema_version = 1
name = "negative-curvature"

[background]
kind = "rot-sym-sphere"
n = 2
points = 64

[[flow]]
id = "g"
kind = "epsilon-surface"
epsilon = 1.0
t_end = 0.05
initial = { profile = "cos-mode", offset = 0.0, amplitude = 0.3, mode = 2 }

[[heat]]
id = "f"
flow = "g"
direction = "forward-in-tau"
q = 1.0
data = { profile = "constant", value = 0.5 }

[[monitor]]
quantity = "hr"
heat = "f"
"#;
    let dir = tempfile::tempdir().unwrap();
    let out = run_file(dir.path(), "neg.toml", text, "out");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonnegative scalar curvature"));
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn study_labels_exact_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("study");
    let out = run(&["study", "identities-torus-constant", "--out", out_dir.to_str().unwrap(), "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("study.json")).unwrap()).unwrap();
    assert_eq!(json["points"], serde_json::json!([64, 128, 256]));
    let rows = json["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r["orders"].as_array().unwrap().iter().all(|o| o == "exact")));
    assert_eq!(json["passes"], true);
}

#[test]
fn study_rejects_two_levels() {
    let out = run(&["study", "identities-torus", "--levels", "2", "--out", "/dev/null/x"]);
    assert_eq!(out.status.code(), Some(1));
}
