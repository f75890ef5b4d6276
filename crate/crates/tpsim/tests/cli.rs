use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tpsim"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn poisson_config_writes_an_event_log() {
    let out = tempfile::tempdir().unwrap();
    let status = bin().arg("simulate").arg(config("poisson_direct.json")).arg("--out").arg(out.path()).status().unwrap();
    assert!(status.success());
    let log = std::fs::read_to_string(out.path().join("events_0000.csv")).unwrap();
    let mut lines = log.lines();
    assert_eq!(lines.next(), Some("time,process_index"));
    let rows: Vec<&str> = lines.collect();
    assert!((20..=90).contains(&rows.len()), "{} events", rows.len());
    for row in rows {
        let (t, i) = row.split_once(',').unwrap();
        let digits = t.chars().filter(char::is_ascii_digit).collect::<String>();
        assert_eq!(digits.trim_start_matches('0').len(), 17, "{t}");
        assert_eq!(i, "0");
    }
    assert!(out.path().join("diagnostics.json").exists());
    assert!(out.path().join("snapshots_0000.csv").exists());
}

#[test]
fn self_exciting_config_runs() {
    let out = tempfile::tempdir().unwrap();
    let status = bin().arg("simulate").arg(config("hawkes_self_exciting.json")).arg("--out").arg(out.path()).status().unwrap();
    assert!(status.success());
}

#[test]
fn outputs_are_deterministic_across_runs_and_threads() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let cfg = config("hawkes_er_validate.json");
    for (dir, threads) in [(&a, "1"), (&b, "1"), (&c, "4")] {
        let status = bin()
            .args(["simulate"])
            .arg(&cfg)
            .args(["--replicates", "3", "--threads", threads, "--out"])
            .arg(dir.path())
            .status()
            .unwrap();
        assert!(status.success());
    }
    let fa = read_dir_sorted(a.path());
    assert_eq!(fa.len(), 7);
    assert_eq!(fa, read_dir_sorted(b.path()));
    assert_eq!(fa, read_dir_sorted(c.path()));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"process\": {\"kind\": \"homogeneous\", \"rates\": [1]},\n  \"methd\": \"direct\"\n}\n").unwrap();
    let out = bin().arg("simulate").arg(&bad).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3"), "{msg}");

    let missing = bin().arg("simulate").arg(dir.path().join("nope.json")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    std::fs::write(&bad, r#"{"process": {"kind": "homogeneous", "rates": [1]}, "method": "chv_full", "tspan": [0, -1]}"#).unwrap();
    assert_eq!(bin().arg("simulate").arg(&bad).output().unwrap().status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.json");
    // A zero rate makes the CHV time change singular.
    std::fs::write(&cfg, r#"{"process": {"kind": "homogeneous", "rates": [0.0]}, "method": "chv_simple", "tspan": [0, 1]}"#).unwrap();
    let out = bin().arg("simulate").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn validate_homogeneous_passes_and_writes_qq() {
    let out = tempfile::tempdir().unwrap();
    let res = bin().arg("validate").arg(config("poisson_validate.json")).arg("--out").arg(out.path()).output().unwrap();
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("alpha=0.01: true"), "{stdout}");
    let qq = std::fs::read_to_string(out.path().join("qq.csv")).unwrap();
    assert!(qq.starts_with("process_index,prob,theoretical,empirical\n"));
    assert_eq!(qq.lines().count(), 100);
}

#[test]
fn validate_rejects_misspecified_compensator() {
    let out = tempfile::tempdir().unwrap();
    let res = bin()
        .arg("validate")
        .arg(config("hawkes_er_misspecified.json"))
        .args(["--replicates", "50", "--out"])
        .arg(out.path())
        .output()
        .unwrap();
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stdout).contains("alpha=0.01: false"));
}

#[test]
fn bench_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.json");
    std::fs::write(&cfg, r#"{"methods": ["coevolve_recursive", "thinning_brute"], "nodes": [1, 5], "runs": 3}"#).unwrap();
    let res = bin().arg("bench").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let table = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("method,V,runs_completed,median_seconds,rejection_rate"));
    assert_eq!(lines.count(), 4);
}
