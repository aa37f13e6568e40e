use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn deccon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deccon")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn every_step_run_exits_clean() {
    let out = deccon(&["run", "--gen", "gnm", "--n", "64", "--m", "512", "--c", "1", "--verify", "every-step", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("schema,n,m,c,"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..4], &["v1", "64", "512", "1"]);
    assert!(lines.next().is_none());
}

#[test]
fn fixed_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let log = dir.path().join(format!("{tag}.log"));
        let out = deccon(&[
            "run", "--gen", "gnm", "--n", "48", "--c", "2", "--preset", "desk", "--seeds", "3", "--seed", "7",
            "--verify", "checkpoints", "--csv", p(&csv), "--log", p(&log),
        ]);
        assert_eq!(code(&out), 0);
        (fs::read(csv).unwrap(), fs::read(log).unwrap())
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    assert_eq!(String::from_utf8_lossy(&a.0).lines().count(), 4);
}

#[test]
fn replay_accepts_clean_log_and_locates_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let dels = dir.path().join("d.txt");
    let log = dir.path().join("run.log");
    fs::write(&graph, "6 7\n0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n2 3\n").unwrap();
    fs::write(&dels, "6\n0\n3\n1\n").unwrap();
    let out = deccon(&[
        "run", "--graph", p(&graph), "--deletions", p(&dels), "--c", "1", "--preset", "desk", "--log", p(&log),
    ]);
    assert_eq!(code(&out), 0);
    let out = deccon(&["verify", "--graph", p(&graph), "--deletions", p(&dels), "--log", p(&log)]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok steps=4");

    let text = fs::read_to_string(&log).unwrap();
    assert!(text.contains("SPLIT 0 1 3 3 4 5"));
    fs::write(&log, text.replace("SPLIT 0 1 3 3 4 5", "SPLIT 0 1 2 4 5")).unwrap();
    let out = deccon(&["verify", "--graph", p(&graph), "--deletions", p(&dels), "--log", p(&log)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("step=1 kind=partition vertex=3"));
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(code(&deccon(&["run", "--gen", "gnm", "--n", "10", "--c", "7"])), 2);
    assert_eq!(code(&deccon(&["run", "--gen", "nope"])), 2);
    assert_eq!(code(&deccon(&["run", "--graph", "/nonexistent/graph.txt"])), 2);
    assert_eq!(code(&deccon(&["run", "--gen", "gnm", "--verify", "sometimes"])), 2);
    assert_eq!(code(&deccon(&["run", "--gen", "gnm", "--p", "1.5"])), 2);
    assert_eq!(code(&deccon(&["frobnicate"])), 2);
}

#[test]
fn matching_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p4.txt");
    fs::write(&path, "4 3\n0 1\n1 2\n2 3\n").unwrap();
    let out = deccon(&["matching", "--graph", p(&path), "--preset", "desk"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "unique 0 2");
    let out = deccon(&["matching", "--gen", "grid", "--n", "16", "--preset", "desk"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "not-unique");
    let out = deccon(&["matching", "--gen", "dumbbell", "--n", "6", "--preset", "desk"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "unique 0 5 6");
    fs::write(&path, "4 3\n0 1\n0 2\n0 3\n").unwrap();
    let out = deccon(&["matching", "--graph", p(&path), "--preset", "desk"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "no-perfect-matching");
}

#[test]
fn injected_fault_fails_and_stats_report() {
    let out = deccon(&["run", "--gen", "gnm", "--n", "40", "--c", "1", "--preset", "desk", "--inject-at", "0", "--verify", "checkpoints"]);
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert!(!col("injected").is_empty());
    assert_eq!(col("self_check"), "fail");

    let out = deccon(&["selftest-stats", "--gen", "gnm", "--n", "32", "--preset", "desk", "--seeds", "5"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("runs=5 passed="));
}
