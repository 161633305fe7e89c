use std::fs;
use std::process::{Command, Output};

fn rado(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rado"))
        .args(args)
        .env_remove("RADO_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn formula_output() {
    let out = rado(&["formula", "--m", "6", "--a", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out).trim(),
        "region=Band2 C=4 R2=5 rule=band2:m=2a,3|a"
    );

    let out = rado(&["formula", "--m", "4", "--a", "10"]);
    assert!(stdout(&out).contains("region=BelowKnown"));
    assert!(stdout(&out).contains("R2=unknown"));

    let out = rado(&["formula", "--m", "3", "--a", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["R2"], "10");
    assert_eq!(v["rule"], "band5:exception");
    assert_eq!(v["region"], "Band5");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["formula", "--m", "2", "--a", "3"][..],
        &["formula", "--m", "abc", "--a", "3"],
        &["formula", "--m", "5", "--a", "0"],
        &["exact", "--m", "5"],
        &["exact", "--m", "5", "--a", "2", "--threads", "0"],
        &["verify", "--m", "4", "--a", "5", "--coloring", "RBXB"],
        &["verify", "--m", "4", "--a", "5", "--coloring", ""],
        &["table", "--a", "6..3", "--m", "3..4"],
        &["lemmas", "--a-range", "x"],
        &["nonsense"],
    ] {
        let out = rado(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn exact_proven_and_budget() {
    let out = rado(&["exact", "--m", "6", "--a", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("value=8 status=Proven"));

    let out = rado(&["exact", "--m", "3", "--a", "1", "--threads", "3"]);
    assert!(stdout(&out).starts_with("value=5 status=Proven witness=RBBR"));

    let out = rado(&["exact", "--m", "6", "--a", "10", "--hint"]);
    assert!(stdout(&out).starts_with("value=6 status=Proven witness=RBBRR"));

    let out = rado(&["exact", "--m", "3", "--a", "3", "--budget", "5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("status=ExhaustedBudget"));

    let out = rado(&["exact", "--m", "3", "--a", "3", "--n-max", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).starts_with("value>=5"));
}

#[test]
fn verify_colorings() {
    let out = rado(&["verify", "--m", "4", "--a", "5", "--coloring", "RBBRRRBB"]);
    assert_eq!((out.status.code(), stdout(&out).trim()), (Some(0), "BAD"));
    let out = rado(&["verify", "--m", "9", "--a", "4", "--coloring", "RBBR"]);
    assert_eq!(stdout(&out).trim(), "BAD");
    let out = rado(&["verify", "--m", "7", "--a", "3", "--coloring", "RRRR"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "red [6->1; 1->2]");
}

#[test]
fn table_to_stdout() {
    let out = rado(&["table", "--a", "3..3", "--m", "7..30", "--mode", "formula"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("a,m,region,C,formula,exact,status,witness,ms")
    );
    let mut tail = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f[2] == "Tail" {
            assert_eq!(f[3], f[4], "{line}");
            tail += 1;
        }
    }
    assert_eq!(tail, 23);
}

#[test]
fn table_band5_exception_rows() {
    let out = rado(&[
        "table", "--a", "10..14", "--m", "6..10", "--mode", "both", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.len(), 25);
    for row in &rows {
        if row["m"].as_u64().unwrap() + 4 == row["a"].as_u64().unwrap() {
            assert_eq!(row["formula"], "6");
            assert_eq!(row["exact"], "6");
        }
    }
}

#[test]
fn table_resume_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.csv");
    let part = dir.path().join("part.csv");
    let base = [
        "table",
        "--a",
        "3..5",
        "--m",
        "3..14",
        "--max-C",
        "12",
        "--no-timing",
    ];

    let run = |path: &std::path::Path, extra: &[&str]| {
        let mut args: Vec<&str> = base.to_vec();
        args.extend_from_slice(&["--out", path.to_str().unwrap()]);
        args.extend_from_slice(extra);
        rado(&args)
    };

    assert_eq!(run(&full, &[]).status.code(), Some(0));
    let out = run(&part, &["--stop-after", "7"]);
    assert!(stderr(&out).contains("stopped early"));
    let partial = fs::read_to_string(&part).unwrap();
    assert_eq!(partial.lines().count(), 8);

    let out = run(&part, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("reused="), "{}", stderr(&out));
    assert_eq!(fs::read(&full).unwrap(), fs::read(&part).unwrap());

    // A third run reuses every proven row and leaves the file unchanged.
    let out = run(&part, &[]);
    assert!(stderr(&out).contains("computed=") && !stderr(&out).contains("reused=0"));
    assert_eq!(fs::read(&full).unwrap(), fs::read(&part).unwrap());
}

#[test]
fn table_json_resume() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let p = path.to_str().unwrap();
    let args = [
        "table",
        "--a",
        "4..4",
        "--m",
        "3..9",
        "--format",
        "json",
        "--out",
        p,
        "--no-timing",
    ];
    assert_eq!(rado(&args).status.code(), Some(0));
    let first = fs::read(&path).unwrap();
    let out = rado(&args);
    assert!(stderr(&out).contains("computed=0"));
    assert_eq!(fs::read(&path).unwrap(), first);
}

#[test]
fn table_discrepancy_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let p = path.to_str().unwrap();
    let args = [
        "table",
        "--a",
        "3..3",
        "--m",
        "5..6",
        "--out",
        p,
        "--no-timing",
    ];
    assert_eq!(rado(&args).status.code(), Some(0));
    // Tamper with a proven exact value; resume keeps it and flags it.
    let text = fs::read_to_string(&path).unwrap();
    let tampered = text.replace("3,6,Band2,4,5,5,Proven", "3,6,Band2,4,5,7,Proven");
    assert_ne!(text, tampered);
    fs::write(&path, tampered).unwrap();
    let out = rado(&args);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("DISCREPANCY a=3 m=6"));
    assert!(fs::read_to_string(&path).unwrap().contains("DISCREPANCY"));
}

#[test]
fn table_unwritable_exits_2() {
    let out = rado(&[
        "table",
        "--a",
        "3..3",
        "--m",
        "3..4",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lemmas_pass_and_write_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reports.json");
    let out = rado(&[
        "lemmas",
        "--a-range",
        "4..8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS completion"));
    let reports: Vec<serde_json::Value> =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(reports
        .iter()
        .all(|r| r["status"] == "PASS" && r["failures"].as_array().unwrap().is_empty()));
}

#[test]
fn lemmas_default_sweep_passes() {
    let out = rado(&["lemmas"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn lemmas_corrupt_template_exits_5() {
    let out = rado(&["lemmas", "--a-range", "3..4", "--inject-corrupt"]);
    assert_eq!(out.status.code(), Some(5));
    let text = stdout(&out);
    assert!(text.contains("FAIL corrupt-fixture"));
    assert!(text.contains("fail (a=3, m=7): [6->3; 1->7] is not a solution"));
}

#[test]
fn thread_override_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_rado"))
        .args(["exact", "--m", "6", "--a", "3"])
        .env("RADO_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("value=5 status=Proven witness=RBBR"));

    let out = Command::new(env!("CARGO_BIN_EXE_rado"))
        .args(["exact", "--m", "6", "--a", "3"])
        .env("RADO_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
