use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blindgossip"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn run_writes_trace_and_audit() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "k3.toml", "topology = \"complete:3\"\nseed = 11\n");
    let o = run(&["run", "--config", &c, "--out-dir", "out"], dir.path());
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert!(csv.starts_with("step,i,j,bytes_round1,bytes_round2,max_dev\n"));
    assert_eq!(csv.lines().count(), 21);
    let audit = fs::read_to_string(dir.path().join("out/audit.txt")).unwrap();
    assert!(audit.contains("0 failed"));
    assert!(stdout(&o).contains("bit-exact"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "ring.toml", "topology = \"ring:5\"\nseed = 3\nmax_steps = 60\n");
    for out in ["a", "b"] {
        assert!(run(&["run", "--config", &c, "--out-dir", out], dir.path()).status.success());
    }
    let seq = run(&["run", "--config", &c, "--out-dir", "c", "--sequential"], dir.path());
    assert!(seq.status.success());
    for f in ["trace.csv", "audit.txt"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        assert_eq!(a, fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
        assert_eq!(a, fs::read(dir.path().join("c").join(f)).unwrap(), "{f}");
    }
    let other = run(&["run", "--config", &c, "--out-dir", "d", "--seed", "4"], dir.path());
    assert!(other.status.success());
    assert_ne!(
        fs::read(dir.path().join("a/trace.csv")).unwrap(),
        fs::read(dir.path().join("d/trace.csv")).unwrap()
    );
}

#[test]
fn injected_fault_fails_oracle_diff() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "k3.toml", "topology = \"complete:3\"\n");
    let clean = run(&["oracle-diff", "--config", &c], dir.path());
    assert!(clean.status.success());
    assert!(stdout(&clean).starts_with("empty diff"));
    let o = run(&["oracle-diff", "--config", &c, "--inject-fault", "6:2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("first divergence: step 6, agent 2"), "{}", stdout(&o));
}

#[test]
fn oracle_diff_needs_test_backend() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "k3.toml", "topology = \"complete:3\"\n");
    let o = run(&["oracle-diff", "--config", &c, "--backend", "pairing"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("test backend"));
}

#[test]
fn reduction_run_is_approximate_pass() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "red.toml", "topology = \"complete:3\"\n[reduction]\nell1 = 6\nk = 3\n");
    let o = run(&["oracle-diff", "--config", &c], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("approximate pass"));
}

#[test]
fn strict_audit_counts_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "k3.toml", "topology = \"complete:3\"\n");
    let o = run(&["audit", "--config", &c], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("DEVIATION"));
    let strict = run(&["audit", "--config", &c, "--strict"], dir.path());
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn spectral_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectral", "--topology", "complete:3"], dir.path());
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("spectral.txt")).unwrap();
    assert_eq!(text, stdout(&o));
    assert!(text.contains("lambda2: 0.500000000000"));
    assert!(text.contains("0.05,") && text.contains("0.01,20"));
    let k2 = run(&["spectral", "--topology", "complete:2"], dir.path());
    assert!(stdout(&k2).contains("0.01,1\n"));
    let bad = run(&["spectral", "--topology", "complete:1"], dir.path());
    assert!(bad.status.success());
}

#[test]
fn config_errors_cite_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "bad.toml", "topology = \"complete:3\"\n[reduction]\nell1 = 158\nk = 1\n");
    let o = run(&["check", "--config", &c], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("strict inequality"), "{}", stderr(&o));
    let c = config(dir.path(), "star.toml", "topology = \"star:3\"\n");
    let o = run(&["run", "--config", &c], dir.path());
    assert!(stderr(&o).contains("presets: complete:N"));
    let c = config(dir.path(), "ok.toml", "topology = \"ring:4\"\n");
    let o = run(&["check", "--config", &c], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("topology = \"ring:4\""));
}

#[test]
fn sweep_summarizes_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "k3.toml", "topology = \"complete:3\"\n");
    let o = run(&["run", "--config", &c, "--sweep-seeds", "4"], dir.path());
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",Exact,pass")));
}
