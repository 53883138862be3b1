use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Command;

/// Tolerances per output column: defaults, overrides and a global scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    command: Command,
    overrides: BTreeMap<String, f64>,
    scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Breach {
    pub row: usize,
    pub column: String,
    pub value: String,
    pub tolerance: f64,
}

impl Tolerances {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            overrides: BTreeMap::new(),
            scale: 1.0,
        }
    }

    pub fn load(command: Command, path: Option<&Path>) -> Result<Self> {
        let mut tol = Self::defaults(command);
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading tolerance file {}", path.display()))?;
            let mut map: BTreeMap<String, f64> =
                serde_json::from_str(&text).with_context(|| {
                    format!(
                        "tolerance file {} is not a JSON object of numbers",
                        path.display()
                    )
                })?;
            if let Some(scale) = map.remove("scale") {
                tol.scale = scale;
            }
            tol.overrides = map;
        }
        Ok(tol)
    }

    /// Tolerance for a column, or `None` when the column is not checked.
    pub fn get(&self, column: &str) -> Option<f64> {
        if let Some(v) = self.overrides.get(column) {
            return Some(*v);
        }
        default_tolerance(self.command, column).map(|v| v * self.scale)
    }
}

fn default_tolerance(command: Command, column: &str) -> Option<f64> {
    let base = column.split('[').next().unwrap_or(column);
    match command {
        Command::GapTable => None,
        Command::VerifyIdentities => match base {
            "a" | "n" | "status" => None,
            _ => Some(1e-30),
        },
        Command::OdeResiduals => match base {
            "beta_reconstruction" | "h_beta_relation" => Some(1e-30),
            "h_edge_relation" => Some(1e-20),
            "riccati_big_r"
            | "riccati_r"
            | "beta_derivative_ratio"
            | "r_derivative_ratio"
            | "r_derivative"
            | "subleading_derivative"
            | "beta_log_derivative"
            | "beta_r_product" => Some(1e-18),
            "r_reconstruction" => Some(1e-12),
            "ode_big_r"
            | "ode_r"
            | "beta_r_quadratic"
            | "beta_r_linear"
            | "h_ode"
            | "r_derivative_squared"
            | "r_derivative_cubic" => Some(1e-10),
            _ => None,
        },
        Command::ScalingScan => (base == "relative_error").then_some(0.02),
        Command::FredholmSigma => matches!(base, "limit_residual" | "pv_residual").then_some(1e-8),
        Command::McCheck => (base == "z_score").then_some(3.0),
    }
}

/// Every checked cell above its tolerance; unparsable cells count as breaches.
/// Status prefix for rows where a quantity is undefined rather than wrong.
pub const DEGENERATE_STATUS: &str = "degenerate: ";

/// Checks every toleranced cell. Empty cells are exempt only in rows marked
/// degenerate; any other status than `ok` is itself a breach.
pub fn find_breaches(table: &crate::table::Table, tol: &Tolerances) -> Vec<Breach> {
    let mut out = Vec::new();
    let status = table.column_index("status");
    let degenerate =
        |row: &Vec<String>| status.is_some_and(|si| row[si].starts_with(DEGENERATE_STATUS));
    for (ci, col) in table.columns.iter().enumerate() {
        let Some(limit) = tol.get(col) else { continue };
        for (ri, row) in table.rows.iter().enumerate() {
            let cell = &row[ci];
            if cell.is_empty() && degenerate(row) {
                continue;
            }
            let ok = cell.parse::<f64>().map(|v| v <= limit).unwrap_or(false);
            if !ok {
                out.push(Breach {
                    row: ri,
                    column: col.clone(),
                    value: cell.clone(),
                    tolerance: limit,
                });
            }
        }
    }
    if let Some(si) = status {
        for (ri, row) in table.rows.iter().enumerate() {
            if row[si] != "ok" && !degenerate(row) {
                out.push(Breach {
                    row: ri,
                    column: "status".into(),
                    value: row[si].clone(),
                    tolerance: 0.0,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Table;

    #[test]
    fn scale_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tol.json");
        std::fs::write(&path, r#"{"scale": 1e-10, "riccati_r": 0.5}"#).unwrap();
        let tol = Tolerances::load(Command::OdeResiduals, Some(&path)).unwrap();
        assert_eq!(tol.get("riccati_r"), Some(0.5));
        assert!((tol.get("ode_r").unwrap() - 1e-20).abs() < 1e-30);
        assert_eq!(tol.get("a"), None);
    }

    #[test]
    fn breaches_include_failed_rows() {
        let mut t = Table::new(vec!["a".into(), "compat_s1[0]".into(), "status".into()]);
        t.push(vec!["0.1".into(), "1e-40".into(), "ok".into()])
            .unwrap();
        t.push(vec!["0.2".into(), "1e-20".into(), "ok".into()])
            .unwrap();
        t.push(vec!["0.3".into(), "".into(), "pole".into()])
            .unwrap();
        let b = find_breaches(&t, &Tolerances::defaults(Command::VerifyIdentities));
        assert_eq!(b.len(), 3);
    }
}
