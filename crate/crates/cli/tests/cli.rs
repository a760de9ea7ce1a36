use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn radfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radfield")).args(args).output().expect("binary runs")
}

fn run(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    radfield(&args)
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn verify_support_passes_on_the_flat_bump() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("verify-support", &config("euclidean_support.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert_eq!(r["verdict"], "PASS");
    assert_eq!(r["summary"]["verdict"], "pass");
    assert_eq!(r["summary"]["x1"], 0.5);
    assert!(dir.path().join("fields.csv").exists());
    assert!(dir.path().join("resolved_config.toml").exists());
    assert_eq!(r["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn psi_not_one_at_the_boundary_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("euclidean_support.toml")).unwrap().replace("psi = [1.0]", "psi = [2.0]");
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, text).unwrap();
    let o = run("verify-support", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("psi(0) must equal 1"));
}

#[test]
fn unknown_keys_and_mismatched_experiments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("euclidean_support.toml")).unwrap();
    let cfg = dir.path().join("typo.toml");
    std::fs::write(&cfg, text.replace("N = 256", "N = 256\ncels = 3")).unwrap();
    assert_eq!(run("verify-support", &cfg, &dir.path().join("a"), &[]).status.code(), Some(2));
    let o = run("solve", &config("euclidean_support.toml"), &dir.path().join("b"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(radfield(&["solve"]).status.code(), Some(2));
}

#[test]
fn failing_verdict_exits_1() {
    // counting samples below 90% of the peak as zero moves mu* far past
    // x1 + 2h, so the converse half of the report fails
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("euclidean_support.toml")).unwrap();
    let cfg = dir.path().join("tight.toml");
    std::fs::write(&cfg, text.replace("[grid]", "[tolerances]\nthreshold = 0.9\n\n[grid]")).unwrap();
    let o = run("verify-support", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(report(&dir.path().join("out"))["verdict"], "FAIL");
}

#[test]
fn convergence_reports_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("convergence", &config("convergence.toml"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let rows = report(dir.path())["summary"]["rows"].as_array().unwrap().clone();
    for r in &rows[1..] {
        let order = r["order"].as_f64().unwrap();
        assert!((order - 2.0).abs() < 0.2, "{order}");
    }
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("N,h,max_error,residual_max,order\n32,"));
}

#[test]
fn csv_output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, cfg, file) in [
        ("verify-support", "warped_support.toml", "fields.csv"),
        ("carleman-sweep", "carleman.toml", "carleman.csv"),
    ] {
        let a = dir.path().join(format!("{sub}-a"));
        let b = dir.path().join(format!("{sub}-b"));
        assert_eq!(run(sub, &config(cfg), &a, &[]).status.code(), Some(0));
        assert_eq!(run(sub, &config(cfg), &b, &["--threads", "1"]).status.code(), Some(0));
        let (x, y) = (std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap());
        assert!(!x.is_empty());
        assert!(x == y, "{sub}: {file} differs between runs");
    }
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("lemmas.toml")).unwrap().replace("count = 100", "count = 5");
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, text).unwrap();
    let first = dir.path().join("first");
    assert_eq!(run("lemma-check", &cfg, &first, &["--seed", "11"]).status.code(), Some(0));
    let resolved = std::fs::read_to_string(first.join("resolved_config.toml")).unwrap();
    assert!(resolved.contains("seed = 11"));
    let second = dir.path().join("second");
    assert_eq!(run("lemma-check", &first.join("resolved_config.toml"), &second, &[]).status.code(), Some(0));
    let (a, b) = (report(&first), report(&second));
    assert_eq!(a["config_sha256"], b["config_sha256"]);
    assert_eq!(a["verdict"], b["verdict"]);
    assert_eq!(std::fs::read(first.join("lemmas.csv")).unwrap(), std::fs::read(second.join("lemmas.csv")).unwrap());
}
