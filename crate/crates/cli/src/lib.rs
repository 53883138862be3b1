//! Driver for the `jacobi-gap` command-line tool.

pub mod config;
pub mod run;
pub mod table;
pub mod tolerance;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use serde::Serialize;

use config::{Format, RunConfig};
use tolerance::{find_breaches, Breach, Tolerances};

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    precision_bits: u32,
    decimal_digits: usize,
    columns: &'a [String],
    row_count: usize,
    node_counts: &'a std::collections::BTreeMap<String, usize>,
    checked: bool,
    breaches: &'a [Breach],
}

#[derive(Debug, Serialize)]
struct Timings {
    compute_seconds: f64,
    write_seconds: f64,
}

/// Outcome of a completed run.
#[derive(Debug)]
pub struct Completed {
    pub breaches: Vec<Breach>,
    pub manifest_path: PathBuf,
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|s| s.to_os_string())
        .unwrap_or_default();
    name.push(suffix);
    out.with_file_name(name)
}

pub fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, ".manifest.json")
}

pub fn timings_path(out: &Path) -> PathBuf {
    sibling(out, ".timings.json")
}

/// Runs the study and writes the table, the manifest (deterministic) and the
/// wall-clock timings (kept apart so reruns produce identical manifests).
pub fn execute(cfg: &RunConfig) -> Result<Completed> {
    let tol = Tolerances::load(cfg.command, cfg.tol_file.as_deref())?;
    let started = Instant::now();
    let out = run::run(cfg)?;
    let compute_seconds = started.elapsed().as_secs_f64();

    let written = Instant::now();
    match cfg.format {
        Format::Csv => out.table.write_csv(&cfg.out)?,
        Format::Json => out.table.write_json(&cfg.out)?,
    }
    let breaches = if cfg.check {
        find_breaches(&out.table, &tol)
    } else {
        Vec::new()
    };
    let prec = cfg.precision()?;
    let manifest = Manifest {
        tool: "jacobi-gap",
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.name(),
        config: cfg,
        precision_bits: prec.bits(),
        decimal_digits: prec.decimal_digits(),
        columns: &out.table.columns,
        row_count: out.table.rows.len(),
        node_counts: &out.node_counts,
        checked: cfg.check,
        breaches: &breaches,
    };
    let manifest_path = manifest_path(&cfg.out);
    std::fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    let timings = Timings {
        compute_seconds,
        write_seconds: written.elapsed().as_secs_f64(),
    };
    std::fs::write(
        timings_path(&cfg.out),
        serde_json::to_string_pretty(&timings)? + "\n",
    )?;
    Ok(Completed {
        breaches,
        manifest_path,
    })
}
