use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dualkit"));
    c.env_remove("DUALKIT_SEED");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn dualkit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn catalog_into_classify_via_stdin() {
    let cat = bin().args(["catalog", "o16"]).output().unwrap();
    assert!(cat.status.success());

    let mut child = bin().args(["classify", "-"]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(&cat.stdout).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().next(), Some("2-unitary, ep=1"));
}

#[test]
fn classify_json_reports_flags() {
    let out = bin().args(["classify", "swap:3", "--json"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["flags"]["dual"], true);
    assert_eq!(v["flags"]["two_unitary"], false);
    assert_eq!(v["label"], "dual");
}

#[test]
fn iterate_is_reproducible_for_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let o = run_in(dir.path(), &["--rng-seed", "11", "iterate", "--seed-cue", "--d", "3", "--max-iters", "40", "--out", name]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for ext in ["csv", "mat"] {
        let a = fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let b = fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert_eq!(a, b, "{ext} differs");
    }
    let csv = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("iter,dual_defect,t_dual_defect,ep"));
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    for (name, workers) in [("w1", "1"), ("w4", "4")] {
        let o = run_in(dir.path(), &["--rng-seed", "5", "--workers", workers, "distribution", "p9", "--N", "2e4", "--out", name]);
        assert!(o.status.success());
    }
    let a = fs::read(dir.path().join("w1.values")).unwrap();
    let b = fs::read(dir.path().join("w4.values")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(bin().args(["iterate", "--map", "nope", "--input", "swap"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["classify", "no-such-gate"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["bogus"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn rank_deficient_seed_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["iterate", "--input", "identity:2", "--out", "t"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rank-deficient"));
}

#[test]
fn distribution_round_trip_through_compare() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(run_in(p, &["--rng-seed", "1", "distribution", "p16", "--N", "2e4", "--out", "h1"]).status.success());
    assert!(run_in(p, &["--rng-seed", "2", "distribution", "p16", "--N", "2e4", "--out", "h2"]).status.success());
    assert!(run_in(p, &["--rng-seed", "3", "distribution", "o16", "--N", "2e4", "--out", "h3"]).status.success());
    for ext in ["csv", "json", "values"] {
        assert!(p.join(format!("h1.{ext}")).exists());
    }
    let same = run_in(p, &["compare", "h1.json", "h2.json"]);
    assert!(stdout(&same).starts_with("not distinguishable"), "{}", stdout(&same));
    let diff = run_in(p, &["compare", "h1", "h3.csv", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&diff.stdout).unwrap();
    assert_eq!(v["distinguishable"], true);
}

#[test]
fn compare_rejects_small_histograms() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(run_in(p, &["distribution", "p9", "--N", "500", "--out", "s"]).status.success());
    assert_eq!(run_in(p, &["compare", "s", "s"]).status.code(), Some(2));
}

#[test]
fn enumerate_qubits() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["enumerate", "--d", "2", "--out", "t.csv"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("ep,gt,representative,count"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn design_of_a_permutation_and_of_an_entangled_gate() {
    let o = bin().args(["design", "p9"]).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("K:") && text.contains("L:"));
    assert!(text.contains("2-unitary = true"));

    let o = bin().args(["design", "o16"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn saved_config_replays_and_env_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let first = run_in(p, &["--rng-seed", "4", "--save-config", "cfg.json", "iterate", "--seed-cue", "--d", "2", "--max-iters", "15", "--out", "r"]);
    assert!(first.status.success());
    let original = fs::read(p.join("r.csv")).unwrap();

    fs::remove_file(p.join("r.csv")).unwrap();
    assert!(run_in(p, &["--config", "cfg.json"]).status.success());
    assert_eq!(fs::read(p.join("r.csv")).unwrap(), original);

    let o = bin().current_dir(p).env("DUALKIT_SEED", "99").args(["--config", "cfg.json"]).output().unwrap();
    assert!(o.status.success());
    assert_ne!(fs::read(p.join("r.csv")).unwrap(), original);
}

#[test]
fn verify_selected_criteria() {
    let o = bin().args(["verify", "--only", "A1,A2"]).output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("PASS A1"));
    assert!(text.contains("PASS A2"));
    assert_eq!(bin().args(["verify", "--only", "A99"]).output().unwrap().status.code(), Some(2));
}
