use std::path::Path;
use std::process::{Command, Output};

fn jacobi_gap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jacobi-gap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_exits_zero() {
    let out = jacobi_gap(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("--command"));
}

#[test]
fn single_gap_probability() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("gap.csv");
    let out = jacobi_gap(&[
        "--command",
        "gap-table",
        "--alpha",
        "1",
        "--n",
        "1",
        "--a",
        "0.5",
        "--out",
        path_arg(&csv_path),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["a", "n", "P", "H", "logdP"]
    );
    let row = reader.records().next().unwrap().unwrap();
    let p: f64 = row[2].parse().unwrap();
    assert!((p - 0.3125).abs() < 1e-15);
    assert!(dir.path().join("gap.csv.manifest.json").exists());
    assert!(dir.path().join("gap.csv.timings.json").exists());
}

#[test]
fn json_output_is_row_major() {
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("gap.json");
    let out = jacobi_gap(&[
        "--command",
        "gap-table",
        "--n-list",
        "1,2",
        "--a",
        "0.25",
        "--format",
        "json",
        "--out",
        path_arg(&json_path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(v["columns"].as_array().unwrap().len(), 5);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["rows"][1][1], "2");
}

#[test]
fn bad_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("x.csv");
    let out = path_arg(&out_path);
    let cases: Vec<Vec<&str>> = vec![
        vec!["--command", "gap-table", "--n", "2", "--out", out],
        vec!["--command", "gap-table", "--a", "0.5", "--out", out],
        vec![
            "--command",
            "gap-table",
            "--n",
            "2",
            "--a",
            "1.5",
            "--out",
            out,
        ],
        vec![
            "--command",
            "gap-table",
            "--alpha",
            "-1",
            "--n",
            "2",
            "--a",
            "0.5",
            "--out",
            out,
        ],
        vec!["--command", "no-such-study", "--out", out],
        vec!["--command", "fredholm-sigma", "--out", out],
        vec![
            "--command",
            "gap-table",
            "--n",
            "2",
            "--a-grid",
            "0.5:0.1",
            "--out",
            out,
        ],
    ];
    for args in cases {
        let o = jacobi_gap(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn degenerate_rows_do_not_fail_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("ode.csv");
    let out = jacobi_gap(&[
        "--command",
        "ode-residuals",
        "--n",
        "3",
        "--a-grid",
        "0:0.3:0.3",
        "--check",
        "--out",
        path_arg(&out_path),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.lines().nth(1).unwrap().contains("degenerate"));
    assert!(text.lines().nth(2).unwrap().ends_with(",ok"));
}

#[test]
fn mc_check_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let p = dir.path().join(name);
        let o = jacobi_gap(&[
            "--command",
            "mc-check",
            "--n",
            "2",
            "--a",
            "0.3",
            "--samples",
            "20000",
            "--seed",
            seed,
            "--out",
            path_arg(&p),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read_to_string(p).unwrap()
    };
    assert_eq!(run("a.csv", "7"), run("b.csv", "7"));
    assert_ne!(run("c.csv", "7"), run("d.csv", "8"));
}
