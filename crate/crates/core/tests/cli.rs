use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn mots(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mots")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn synth(dir: &Path, seed: &str, noise: &str) {
    let o = mots(&["synth", "--seed", seed, "--frames", "8", "--objects", "3", "--out-dir", dir.to_str().unwrap(), "--noise", noise]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synth_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    synth(a.path(), "5", "medium");
    synth(b.path(), "5", "medium");
    for name in ["gt.txt", "detections.txt", "boxes.txt", "scene.json", "run.cfg"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between runs");
        assert!(!x.is_empty(), "{name} is empty");
    }
}

#[test]
fn eval_ground_truth_against_itself() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "1", "none");
    let gt = dir.path().join("gt.txt");
    let csv = dir.path().join("scores.csv");
    let o = mots(&["eval", "--gt", gt.to_str().unwrap(), "--pred", gt.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let table = stdout(&o);
    assert!(table.contains("1.0000"), "{table}");
    let csv = std::fs::read_to_string(csv).unwrap();
    assert!(csv.lines().count() >= 2, "{csv}");
}

#[test]
fn track_clean_detections_is_perfect() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "3", "none");
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_owned();
    let o = mots(&["track", "--detections", &p("detections.txt"), "--gt", &p("gt.txt"), "--config", &p("run.cfg")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["metrics"]["all"]["smotsa"], 1.0, "{summary}");
    assert_eq!(summary["metrics"]["all"]["ids"], 0);
    assert!(summary.get("timings").is_none());
    assert!(dir.path().join("tracks.txt").exists());

    // the written tracks score perfectly as well
    let o = mots(&["eval", "--gt", &p("gt.txt"), "--pred", &p("tracks.txt")]);
    assert!(o.status.success());
}

#[test]
fn track_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), "9", "low");
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_owned();
    let run = |out: &str| {
        let o = mots(&["track", "--detections", &p("detections.txt"), "--config", &p("run.cfg"), "--out", &p(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (stdout(&o), std::fs::read(p(out)).unwrap())
    };
    assert_eq!(run("a.txt"), run("b.txt"));
}

#[test]
fn cost_prints_both_ratios() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cost.cfg");
    std::fs::write(&cfg, "# defaults plus one override\ncost_conv3d = 20\n").unwrap();
    let o = mots(&["cost", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let ratio: f64 = text.lines().next().unwrap().strip_prefix("cost_ratio ").unwrap().parse().unwrap();
    assert!((ratio - 140.0 / 260.0).abs() < 1e-12, "{text}");
    assert!(text.contains("exact_ratio "));
}

#[test]
fn exit_codes() {
    assert_eq!(mots(&["eval", "--bogus"]).status.code(), Some(1));
    assert_eq!(mots(&["--help"]).status.code(), Some(0));
    let o = mots(&["eval", "--gt", "/nonexistent/gt.txt", "--pred", "/nonexistent/p.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));

    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "0 1001 1 2 2 not-rle\n").unwrap();
    let o = mots(&["eval", "--gt", bad.to_str().unwrap(), "--pred", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "temporal_range = 0\n").unwrap();
    assert_eq!(mots(&["cost", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    assert_eq!(mots(&["cost", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
