use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, ValueEnum};
use jacobi_gap_core::{Precision, Real};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GapTable,
    VerifyIdentities,
    OdeResiduals,
    ScalingScan,
    FredholmSigma,
    McCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GapTable => "gap-table",
            Command::VerifyIdentities => "verify-identities",
            Command::OdeResiduals => "ode-residuals",
            Command::ScalingScan => "scaling-scan",
            Command::FredholmSigma => "fredholm-sigma",
            Command::McCheck => "mc-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Reproducible tables for the gapped Jacobi ensemble studies.
#[derive(Debug, Clone, Parser, Serialize, Deserialize, PartialEq)]
#[command(name = "jacobi-gap", version)]
pub struct RunConfig {
    /// Study to run.
    #[arg(long, value_enum)]
    pub command: Command,

    /// Jacobi exponent α > 0 (decimal literal, parsed at the working precision).
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub alpha: String,

    /// Single matrix size.
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<usize>,

    /// Comma-separated matrix sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,

    /// Single gap half-width in [0, 1).
    #[arg(long, conflicts_with = "a_grid", allow_hyphen_values = true)]
    pub a: Option<String>,

    /// Gap half-widths `lo:hi:step`, both ends included.
    #[arg(long, allow_hyphen_values = true)]
    pub a_grid: Option<String>,

    /// Comma-separated values of the scaled variable t.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t_list: Option<Vec<String>>,

    /// Working precision in bits.
    #[arg(long, default_value_t = 256)]
    pub bits: u32,

    /// Finite-difference step as a power of two (default: -bits/4).
    #[arg(long, allow_hyphen_values = true)]
    pub step_exp: Option<i32>,

    /// Monte Carlo seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,

    /// Output table; the run manifest is written next to it.
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Exit with status 2 when any checked quantity exceeds its tolerance.
    #[arg(long)]
    pub check: bool,

    /// JSON object of tolerance overrides, keyed by column name; the key
    /// `scale` multiplies every default.
    #[arg(long)]
    pub tol_file: Option<PathBuf>,
}

impl RunConfig {
    pub fn precision(&self) -> Result<Precision> {
        Ok(Precision::new(self.bits)?)
    }

    pub fn alpha(&self) -> Result<Real> {
        let alpha = Real::parse(&self.alpha, self.precision()?)?;
        ensure!(alpha > 0.0, "--alpha must be positive");
        Ok(alpha)
    }

    pub fn n_values(&self) -> Result<Vec<usize>> {
        let ns = match (&self.n, &self.n_list) {
            (Some(n), None) => vec![*n],
            (None, Some(list)) => list.clone(),
            _ => bail!("{} needs --n or --n-list", self.command.name()),
        };
        ensure!(!ns.is_empty(), "empty --n-list");
        ensure!(
            ns.iter().all(|&n| n >= 1),
            "matrix sizes must be at least 1"
        );
        Ok(ns)
    }

    pub fn a_values(&self) -> Result<Vec<Real>> {
        let prec = self.precision()?;
        let values = match (&self.a, &self.a_grid) {
            (Some(a), None) => vec![Real::parse(a, prec)?],
            (None, Some(grid)) => parse_grid(grid, prec)?,
            _ => bail!("{} needs --a or --a-grid", self.command.name()),
        };
        for a in &values {
            ensure!(
                *a >= 0.0 && *a < 1.0,
                "gap half-width {} outside [0, 1)",
                a.to_f64()
            );
        }
        Ok(values)
    }

    pub fn t_values(&self) -> Result<Vec<Real>> {
        let prec = self.precision()?;
        let list = self
            .t_list
            .as_ref()
            .with_context(|| format!("{} needs --t-list", self.command.name()))?;
        ensure!(!list.is_empty(), "empty --t-list");
        list.iter()
            .map(|t| {
                let v = Real::parse(t, prec)?;
                ensure!(v > 0.0, "t values must be positive");
                Ok(v)
            })
            .collect()
    }

    pub fn step(&self) -> Result<Option<Real>> {
        let prec = self.precision()?;
        Ok(self.step_exp.map(|e| prec.pow2(e)))
    }

    /// Catches missing or malformed parameters before any computation.
    pub fn validate(&self) -> Result<()> {
        self.precision()?;
        self.alpha()?;
        match self.command {
            Command::GapTable | Command::VerifyIdentities | Command::OdeResiduals => {
                self.n_values()?;
                self.a_values()?;
            }
            Command::ScalingScan => {
                self.n_values()?;
                self.t_values()?;
            }
            Command::FredholmSigma => {
                self.t_values()?;
            }
            Command::McCheck => {
                self.n_values()?;
                self.a_values()?;
            }
        }
        if let Some(e) = self.step_exp {
            ensure!(e < 0, "--step-exp must be negative");
        }
        Ok(())
    }
}

/// `lo:hi:step` with both ends included; points are `lo + k * step`.
pub fn parse_grid(text: &str, prec: Precision) -> Result<Vec<Real>> {
    let parts: Vec<&str> = text.split(':').collect();
    ensure!(
        parts.len() == 3,
        "grid `{text}` is not of the form lo:hi:step"
    );
    let lo = Real::parse(parts[0], prec)?;
    let hi = Real::parse(parts[1], prec)?;
    let step = Real::parse(parts[2], prec)?;
    ensure!(step > 0.0, "grid step must be positive");
    ensure!(hi >= lo, "grid upper end below lower end");
    let count = ((&hi - &lo) / &step).to_f64();
    ensure!(count < 1e5, "grid `{text}` has too many points");
    let last = (count + 1e-9).floor() as i64;
    Ok((0..=last).map(|k| &lo + &step * k as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("jacobi-gap").chain(args.iter().copied()))
            .unwrap()
    }

    #[test]
    fn grid_includes_both_ends() {
        let p = Precision::default();
        let g = parse_grid("0.1:0.5:0.1", p).unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[4].to_f64() - 0.5).abs() < 1e-15);
        assert!(parse_grid("0.1:0.5", p).is_err());
        assert!(parse_grid("0.5:0.1:0.1", p).is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = parse(&[
            "--command",
            "ode-residuals",
            "--alpha",
            "0.5",
            "--n-list",
            "4,8",
            "--a-grid",
            "0.1:0.4:0.15",
            "--bits",
            "512",
            "--step-exp",
            "-80",
            "--out",
            "x.csv",
        ]);
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn missing_parameters_are_rejected() {
        assert!(
            parse(&["--command", "gap-table", "--a", "0.5", "--out", "x"])
                .validate()
                .is_err()
        );
        assert!(parse(&[
            "--command",
            "gap-table",
            "--n",
            "2",
            "--a",
            "1.5",
            "--out",
            "x"
        ])
        .validate()
        .is_err());
        assert!(parse(&["--command", "fredholm-sigma", "--out", "x"])
            .validate()
            .is_err());
        assert!(parse(&[
            "--command",
            "mc-check",
            "--n",
            "1",
            "--a",
            "0.5",
            "--alpha",
            "-1",
            "--out",
            "x"
        ])
        .validate()
        .is_err());
    }
}
