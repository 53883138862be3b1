//! Acceptance check for the command-line contract. Prints one PASS/FAIL line.

use std::io::Write;
use std::path::Path;
use std::process::Command;

fn run(args: &[&str], out: &Path, extra: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_jacobi-gap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
        .status;
    status.code().unwrap_or(-1)
}

/// Study configurations. Precision is chosen so every checked column sits
/// within ten orders of magnitude of its default tolerance.
fn studies() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        (
            "gap-table",
            vec![
                "--command",
                "gap-table",
                "--n-list",
                "1,3,6",
                "--a-grid",
                "0:0.6:0.2",
            ],
        ),
        (
            "verify-identities",
            vec![
                "--command",
                "verify-identities",
                "--alpha",
                "0.5",
                "--n-list",
                "2,5",
                "--a",
                "0.3",
                "--bits",
                "160",
            ],
        ),
        (
            "ode-residuals",
            vec![
                "--command",
                "ode-residuals",
                "--n-list",
                "3,6",
                "--a-grid",
                "0.1:0.3:0.2",
                "--bits",
                "128",
            ],
        ),
        (
            "scaling-scan",
            vec![
                "--command",
                "scaling-scan",
                "--n",
                "40",
                "--t-list",
                "1",
                "--bits",
                "128",
            ],
        ),
        (
            "fredholm-sigma",
            vec![
                "--command",
                "fredholm-sigma",
                "--t-list",
                "0.5,2",
                "--bits",
                "96",
            ],
        ),
        (
            "mc-check",
            vec![
                "--command",
                "mc-check",
                "--n",
                "2",
                "--a",
                "0.3",
                "--samples",
                "50000",
                "--seed",
                "11",
            ],
        ),
    ]
}

#[test]
fn criterion_8_cli_contract() {
    let dir = tempfile::tempdir().unwrap();
    let tight = dir.path().join("tight.json");
    std::fs::write(&tight, r#"{"scale": 1e-10}"#).unwrap();
    let tight = tight.to_str().unwrap();
    let mut failures = Vec::new();

    for (name, args) in studies() {
        let mut outputs = Vec::new();
        for (k, format) in ["csv", "csv", "json", "json"].iter().enumerate() {
            let out = dir.path().join(format!("{name}-{k}.{format}"));
            let code = run(&args, &out, &["--format", format, "--check"]);
            if code != 0 {
                failures.push(format!("{name} {format} exited {code}"));
            }
            let table = std::fs::read(&out).unwrap_or_default();
            let manifest = std::fs::read_to_string(
                dir.path()
                    .join(format!("{name}-{k}.{format}.manifest.json")),
            )
            .unwrap_or_default()
            .replace(&format!("{name}-{k}"), "OUT");
            outputs.push((table, manifest));
        }
        if outputs[0] != outputs[1] || outputs[2] != outputs[3] {
            failures.push(format!("{name} reruns differ"));
        }
        if name == "gap-table" {
            // no checked columns
            continue;
        }
        let out = dir.path().join(format!("{name}-tight.csv"));
        let code = run(&args, &out, &["--check", "--tol-file", tight]);
        if code != 2 {
            failures.push(format!("{name} with tightened tolerances exited {code}"));
        }
    }

    let out = dir.path().join("bad.csv");
    for bad in [
        vec!["--command", "gap-table", "--a", "0.5"],
        vec!["--command", "gap-table", "--n", "2", "--a", "1"],
        vec!["--command", "fredholm-sigma", "--t-list", "0"],
        vec!["--bogus"],
    ] {
        let code = run(&bad, &out, &[]);
        if code != 1 {
            failures.push(format!("{bad:?} exited {code}"));
        }
    }
    let help = Command::new(env!("CARGO_BIN_EXE_jacobi-gap"))
        .arg("--help")
        .status()
        .unwrap();
    if help.code() != Some(0) {
        failures.push("--help did not exit 0".into());
    }

    let pass = failures.is_empty();
    let detail = if pass {
        "six studies rerun byte-identically in csv and json; exit 0 on success, 1 on bad input, 2 once tolerances are tightened 1e10-fold".to_string()
    } else {
        failures.join("; ")
    };
    let line = format!(
        "acceptance 8 [{}] command-line contract: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(line.as_bytes()).unwrap();
    stdout.flush().unwrap();
    assert!(pass, "{detail}");
}
