use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vslab"))
        .args(args)
        .env_remove("VSLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn mean_writes_exact_rationals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mean.json");
    let res = vslab(&["mean", "--field", "7^1", "--d", "4", "--s", "1", "--a", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let v = json(&out);
    assert_eq!(v["command"], "mean");
    assert_eq!(v["seed"], 0);
    let row = &v["results"][0];
    assert_eq!(row["key"], "q=7^1/0,1;d=4;s=1;a=1");
    assert!(row["mean"].as_str().unwrap().contains('/'));
    assert!(row["residual"].as_str().unwrap().contains('/'));
    assert_eq!(row["identity"], true);
}

#[test]
fn verify_identities_over_all_a() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ids.json");
    let res = vslab(&["verify-identities", "--field", "5^1", "--d", "4", "--s", "1", "--a", "all", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let rows = json(&out)["results"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r["mean_ok"] == true && r["second_moment_ok"] == true));
    let subsets = vslab(&["verify-identities", "--field", "5^1", "--d", "4", "--s", "1", "--a", "2", "--method", "subsets"]);
    assert_eq!(code(&subsets), 0);
}

#[test]
fn sweep_is_reproducible_and_worker_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let res = vslab(&[
            "sweep", "--fields", "5^1,7^1,11^1,13^1", "--d", "5", "--s", "1", "--a", "random:3", "--seed", "42",
            "--workers", workers, "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
        out
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "3");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    let (header, rows) = csv_rows(&a);
    assert_eq!(rows.len(), 12);
    assert!(header.iter().any(|h| h == "chi"));
    assert!(header.iter().any(|h| h == "bounds_ok"));
    assert!(rows.iter().all(|r| r[0] == "42"));
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["x.json", "y.json"].iter().map(|n| dir.path().join(n)).collect();
    for (p, w) in paths.iter().zip(["1", "2"]) {
        let res = vslab(&["verify-bounds", "--field", "11", "--d", "5", "--s", "1,2", "--a", "random:2", "--seed", "7", "--workers", w, "--out", p.to_str().unwrap()]);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    }
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
}

#[test]
fn bounds_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let res = vslab(&["verify-bounds", "--field", "7", "--d", "5", "--s", "1", "--a", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["seed", "key", "kind", "q", "d", "s", "r", "m", "n", "lhs", "rhs", "applicable", "pass"]);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[9].contains('/')));
}

#[test]
fn merge_policy() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    for (name, field) in [("s5.csv", "5"), ("s7.csv", "7")] {
        let res = vslab(&["sweep", "--field", field, "--d", "4", "--s", "1", "--a", "all", "--out", p(name).to_str().unwrap()]);
        assert_eq!(code(&res), 0);
    }
    let merged = p("m.csv");
    let res = vslab(&["merge", p("s7.csv").to_str().unwrap(), p("s5.csv").to_str().unwrap(), "--out", merged.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let (_, rows) = csv_rows(&merged);
    assert_eq!(rows.len(), 12);
    assert!(rows[0][1].starts_with("q=5^1/"));
    let keys: Vec<&String> = rows.iter().map(|r| &r[1]).collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));

    let twice = p("t.csv");
    let res = vslab(&["merge", p("s5.csv").to_str().unwrap(), p("s5.csv").to_str().unwrap(), "--out", twice.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    assert_eq!(csv_rows(&twice).1.len(), 10);

    let other = p("chi.csv");
    let res = vslab(&["chi", "--field", "5", "--d", "4", "--s", "1", "--a", "1", "--out", other.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let res = vslab(&["merge", p("s5.csv").to_str().unwrap(), other.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("schema mismatch"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&vslab(&["mean", "--d", "4", "--s", "1"])), 2);
    assert_eq!(code(&vslab(&["mean", "--field", "6", "--d", "4", "--s", "1"])), 2);
    assert_eq!(code(&vslab(&["mean", "--field", "7", "--d", "4", "--s", "3"])), 2);
    assert_eq!(code(&vslab(&["second-moment", "--field", "7", "--d", "4", "--s", "1", "--mode", "loose"])), 2);
    assert_eq!(code(&vslab(&["chi", "--field", "7", "--d", "4", "--s", "1", "--a", "1", "--budget", "0"])), 2);
    assert_eq!(
        code(&vslab(&["chi", "--field", "13", "--d", "6", "--s", "1", "--a", "1", "--method", "subsets", "--budget", "100"])),
        2
    );
    assert_eq!(code(&vslab(&["mean", "--field", "7", "--d", "4", "--s", "1", "--a", "9"])), 2);
    assert_eq!(code(&vslab(&["no-such-command"])), 2);
    let bad_env = Command::new(env!("CARGO_BIN_EXE_vslab"))
        .args(["mean", "--field", "7", "--d", "3", "--s", "0"])
        .env("VSLAB_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&bad_env), 2);
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out_cfg = dir.path().join("cfg.json");
    let out_flags = dir.path().join("flags.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"field": "7^1", "d": 4, "s": "1", "a": "random:2", "seed": 3, "mode": "paper", "out": "{}"}}"#,
            out_cfg.display()
        ),
    )
    .unwrap();
    assert_eq!(code(&vslab(&["second-moment", "--config", cfg.to_str().unwrap()])), 0);
    let res = vslab(&[
        "second-moment", "--field", "7^1", "--d", "4", "--s", "1", "--a", "random:2", "--seed", "3", "--mode", "paper",
        "--out", out_flags.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0);
    assert_eq!(fs::read(&out_cfg).unwrap(), fs::read(&out_flags).unwrap());
    assert_eq!(json(&out_cfg)["results"][0]["mode"], "paper");

    fs::write(&cfg, r#"{"field": "7", "colour": "blue"}"#).unwrap();
    assert_eq!(code(&vslab(&["mean", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn appendix_exit_codes() {
    assert_eq!(code(&vslab(&["appendix", "--field", "7", "--d", "4"])), 0);
    let res = vslab(&["appendix", "--field", "3", "--d", "7"]);
    assert_eq!(code(&res), 1);
    assert!(String::from_utf8_lossy(&res.stderr).contains("FAILED disc"));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["results"][0]["case"], "p|(d-1)-odd");
    assert_eq!(v["results"][0]["diagnostic_matched"], "up_to_scalar");
}

#[test]
fn counting_commands_agree() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let run = |cmd: &str, method: &str, out: &Path| {
        let res = vslab(&[cmd, "--field", "5", "--d", "3", "--s", "1", "--a", "1", "--method", method, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
        json(out)["results"].as_array().unwrap().iter().map(|r| r[if cmd == "gamma" { "closed" } else { cmd }].clone()).collect::<Vec<_>>()
    };
    assert_eq!(run("chi", "profile", &p("c1.json")), run("chi", "subsets", &p("c2.json")));
    assert_eq!(run("smn", "profile", &p("s1.json")), run("smn", "brute", &p("s2.json")));
    assert_eq!(run("gamma", "scan", &p("g1.json")), run("gamma", "reference", &p("g2.json")));
}

#[test]
fn audit_linear_passes() {
    let res = vslab(&["audit-linear", "--field", "5", "--d", "4", "--s", "1", "--a", "1", "--trials", "10", "--seed", "1"]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r["ok"] == true && r["brute_all"].is_string()));
}
