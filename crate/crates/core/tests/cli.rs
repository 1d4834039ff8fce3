use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn zps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zps-count"))
        .args(args)
        .env_remove("ZPS_COUNT_BUDGET")
        .env_remove("ZPS_COUNT_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch_file(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("zps-count-{}-{name}", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn count_by_every_method() {
    for method in ["explicit", "recursive", "bruteforce"] {
        let doc = json(&zps(&[
            "count", "--n", "2", "--m", "2", "--p", "2", "--s", "2", "--j", "2", "--method", method,
        ]));
        assert_eq!(doc["count"], "78", "{method}");
        assert_eq!(doc["method"], method);
    }
    let doc = json(&zps(&[
        "count", "--n", "2", "--m", "2", "--p", "2", "--s", "2", "--j", "2",
    ]));
    assert_eq!(doc["formula"], "kernel-equals-modulus");
    let doc = json(&zps(&[
        "count", "--n", "2", "--m", "3", "--p", "2", "--s", "2", "--j", "3",
    ]));
    assert_eq!(doc["formula"], "recursion");
}

#[test]
fn count_rejects_bad_input() {
    let out = zps(&[
        "count", "--n", "2", "--m", "2", "--p", "4", "--s", "1", "--j", "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = zps(&[
        "count", "--n", "-1", "--m", "2", "--p", "2", "--s", "1", "--j", "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = zps(&[
        "count",
        "--n",
        "3",
        "--m",
        "3",
        "--p",
        "5",
        "--s",
        "2",
        "--j",
        "0",
        "--method",
        "bruteforce",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn budget_from_environment_and_flag() {
    let args = [
        "count",
        "--n",
        "2",
        "--m",
        "2",
        "--p",
        "2",
        "--s",
        "2",
        "--j",
        "0",
        "--method",
        "bruteforce",
    ];
    let run = |env: &str, extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_zps-count"))
            .args(args)
            .args(extra)
            .env("ZPS_COUNT_BUDGET", env)
            .env("ZPS_COUNT_THREADS", "2")
            .output()
            .unwrap()
    };
    assert_eq!(run("100", &[]).status.code(), Some(3));
    let out = run("100", &["--budget", "1000"]);
    assert_eq!(json(&out)["count"], "96");
}

#[test]
fn table_formats() {
    let base = ["table", "--n", "2", "--m", "2", "--p", "2", "--s", "1"];
    let doc = json(&zps(&base));
    assert_eq!(doc["total"], "16");
    assert_eq!(doc["counts"]["0"], "6");
    assert_eq!(doc["counts"]["1"], "9");
    assert_eq!(doc["counts"]["2"], "1");

    let csv = zps(&[&base[..], &["--format", "csv"]].concat());
    assert_eq!(
        String::from_utf8(csv.stdout).unwrap(),
        "j,count\n0,6\n1,9\n2,1\n"
    );

    let plain = zps(&[&base[..], &["--format", "plain"]].concat());
    assert!(plain.status.success());
    assert!(String::from_utf8(plain.stdout).unwrap().contains('9'));

    let empty = zps(&[
        "table", "--n", "0", "--m", "3", "--p", "2", "--s", "1", "--format", "csv",
    ]);
    assert_eq!(String::from_utf8(empty.stdout).unwrap(), "j,count\n3,1\n");
}

#[test]
fn table_methods_agree() {
    let mut docs = Vec::new();
    for method in ["explicit", "recursive", "bruteforce"] {
        let mut doc = json(&zps(&[
            "table", "--n", "3", "--m", "2", "--p", "3", "--s", "1", "--method", method,
        ]));
        doc.as_object_mut().unwrap().remove("method");
        docs.push(doc);
    }
    assert_eq!(docs[0], docs[1]);
    assert_eq!(docs[1], docs[2]);
}

#[test]
fn verify_small_grid() {
    let out = zps(&[
        "verify",
        "--max-n",
        "2",
        "--max-m",
        "2",
        "--max-s",
        "2",
        "--primes",
        "2,3",
        "--with-bruteforce",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("ok ")).count(), 16);
    assert!(!text.contains("MISMATCH"));
    let out = zps(&[
        "verify", "--max-n", "1", "--max-m", "1", "--max-s", "1", "--primes", "6",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_matrix_file() {
    let path = scratch_file(
        "solve.json",
        r#"{"p":2,"s":2,"n":2,"m":2,"entries":[2,0,0,2]}"#,
    );
    let doc = json(&zps(&["solve", "--input", path.to_str().unwrap()]));
    assert_eq!(doc["eta"], "4");
    assert_eq!(doc["eta_power"], "2^2");
    assert_eq!(doc["valuations"], serde_json::json!([1, 1]));
    assert_eq!(doc["gcd_det"], "4");
    assert_eq!(doc["gcd_det_correct"], true);

    let path = scratch_file("wide.json", r#"{"p":3,"s":1,"n":1,"m":2,"entries":[1,-1]}"#);
    let doc = json(&zps(&["solve", "--input", path.to_str().unwrap()]));
    assert_eq!(doc["eta"], "3");
    assert!(doc.get("gcd_det").is_none());

    let bad = scratch_file("bad.json", r#"{"p":2,"s":2,"n":2,"m":2,"entries":[1,2,3]}"#);
    assert_eq!(
        zps(&["solve", "--input", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    let extra = scratch_file(
        "extra.json",
        r#"{"p":2,"s":1,"n":1,"m":1,"entries":[1],"q":3}"#,
    );
    assert_eq!(
        zps(&["solve", "--input", extra.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        zps(&["solve", "--input", "/nonexistent/zps.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn solve_round_trip_through_json() {
    let body = r#"{"p":3,"s":2,"n":2,"m":3,"entries":[3,6,1,0,9,4]}"#;
    let a = zps_count::ZpsMatrix::from_json(body).unwrap();
    let path = scratch_file("round.json", &a.to_json());
    let doc = json(&zps(&["solve", "--input", path.to_str().unwrap()]));
    assert_eq!(doc["eta"], a.solution_count().to_string());
    assert_eq!(zps_count::ZpsMatrix::from_json(&a.to_json()).unwrap(), a);
}

#[test]
fn prob_output() {
    let doc = json(&zps(&["prob", "--n", "2", "--p", "2", "--s", "2"]));
    assert_eq!(doc["probability"], "123/128");
    assert_eq!(doc["probability_decimal"], "0.9609375");
    assert_eq!(doc["leading_term"], "31/32");
    assert_eq!(doc["residual"], "1/128");
    let doc = json(&zps(&["prob", "--n", "1", "--p", "3", "--s", "1"]));
    assert_eq!(doc["probability"], "1");
    assert!(doc["residual"].is_null());
    assert_eq!(
        zps(&["prob", "--n", "2", "--p", "9", "--s", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn crt_output() {
    let doc = json(&zps(&[
        "crt",
        "--n",
        "2",
        "--m",
        "2",
        "--factors",
        "2^2,3^1",
        "--j",
        "0,0",
    ]));
    assert_eq!(doc["count"], "4608");
    assert_eq!(doc["modulus"], "12");
    assert_eq!(doc["solutions"], "1");
    for bad in [
        ["2^2,2^1", "0,0"],
        ["2^2;3", "0,0"],
        ["2^2,3^1", "0"],
        ["2^2,3^1", "a,0"],
    ] {
        let out = zps(&[
            "crt",
            "--n",
            "2",
            "--m",
            "2",
            "--factors",
            bad[0],
            "--j",
            bad[1],
        ]);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
    }
}
