use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn covest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covest")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn sweep_writes_csv_and_summary() {
    let dir = tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"model":{"kind":"gaussian","n":4},"grid":{"n":[4,8],"ratio":[4,16]},"trials":2,"master_seed":5}"#,
    );
    let out = dir.path().join("rows.csv");
    let o = covest(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("experiment,n,N,trial,seed,metric,value\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rows.csv.summary.json")).unwrap()).unwrap();
    assert!(summary["fit"]["slope"].is_number());

    // Same config and seed give the same bytes on stdout.
    let again = covest(&["sweep", "--config", &cfg, "--jobs", "1"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
    let other = covest(&["sweep", "--config", &cfg, "--seed", "6"]);
    assert_ne!(String::from_utf8(other.stdout).unwrap(), text);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(covest(&["coupon", "--config", &bad]).status.code(), Some(2));
    assert_eq!(covest(&["coupon", "--config", "/nonexistent.json"]).status.code(), Some(2));
    let wrong = write(dir.path(), "w.json", r#"{"experiment":"frame"}"#);
    assert_eq!(covest(&["coupon", "--config", &wrong]).status.code(), Some(2));
    assert_eq!(covest(&["coupon", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(covest(&["coupon", "--jobs", "0"]).status.code(), Some(2));
    assert_eq!(covest(&["nosuch"]).status.code(), Some(2));
    let q4 = write(
        dir.path(),
        "q.json",
        r#"{"model":{"kind":"gaussian","n":4,"q":4},"grid":{"n":[4],"ratio":[4]}}"#,
    );
    assert_eq!(covest(&["sweep", "--config", &q4]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_with_3() {
    let dir = tempdir().unwrap();
    let inst = covest::decoupling::instances::near_duplicate_family(8, 32, 24, 1e-3, 2, 4);
    let mut v = serde_json::to_value(&inst).unwrap();
    v["params"] = serde_json::json!({"max_iter": 1});
    let p = write(dir.path(), "i.json", &v.to_string());
    let o = covest(&["decouple", &p]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn decouple_emits_an_audited_certificate() {
    let dir = tempdir().unwrap();
    let inst = covest::decoupling::instances::near_duplicate_family(16, 128, 100, 1e-3, 2, 8);
    let p = write(dir.path(), "i.json", &serde_json::to_string(&inst).unwrap());
    let o = covest(&["decouple", &p, "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cert: covest::DecouplingCertificate = serde_json::from_slice(&o.stdout).unwrap();
    let params = covest::DecouplingParams::new(128);
    assert!(covest::check_decoupling(&cert, &inst.vectors, &params).passes());
    let report = String::from_utf8(o.stderr).unwrap();
    assert!(report.contains("slack=") && !report.contains("FAIL"));
}

#[test]
fn structure_input_gives_a_certificate() {
    let dir = tempdir().unwrap();
    let b: Vec<f64> = (1..=1024).map(|i| 1.0 / i as f64).collect();
    let p = write(dir.path(), "b.json", &serde_json::json!({ "b": b }).to_string());
    let out = dir.path().join("cert.json");
    let o = covest(&["structure", &p, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["passes"], true);
    assert!(v["certificate"]["i1"].as_array().is_some_and(|a| !a.is_empty()));

    let bad = write(dir.path(), "bad.json", r#"{"b": [1.0, 1.0, 1.0, 1.0, 1.0]}"#);
    assert_ne!(covest(&["structure", &bad]).status.code(), Some(0));
}

#[test]
fn every_subcommand_runs_on_a_small_config() {
    let dir = tempdir().unwrap();
    for (cmd, cfg) in [
        ("frame", r#"{"grid":{"n":[4],"N":[16],"M":[8,16]},"trials":2}"#),
        ("coupon", r#"{"grid":{"n":[4],"N":[4,16]},"trials":2}"#),
        ("baiyin", r#"{"model":{"kind":"gaussian","n":1},"grid":{"N":[100],"beta":[0.2]},"trials":2}"#),
        ("structure", r#"{"grid":{"M":[256]},"trials":4}"#),
        ("decouple", r#"{"grid":{"n":[16],"N":[128]},"trials":2,"params":{"duplicates":100}}"#),
        ("truncation", r#"{"model":{"kind":"cube","n":4},"grid":{"n":[4],"N":[64]},"trials":2,"params":{"resamples":100}}"#),
    ] {
        let p = write(dir.path(), &format!("{cmd}.json"), cfg);
        let o = covest(&[cmd, "--config", &p]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8(o.stdout).unwrap().lines().count() > 1, "{cmd}");
    }
}
