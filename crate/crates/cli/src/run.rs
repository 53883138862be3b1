use std::collections::BTreeMap;

use anyhow::Result;
use jacobi_gap_core::dynamics::{
    riccati_residuals, second_order_residuals, TableFamily, RICCATI_RESIDUALS,
    SECOND_ORDER_RESIDUALS,
};
use jacobi_gap_core::fredholm::{
    continued_sigma, scaled_limit_residual, scaling_convergence, sigma_oracle,
};
use jacobi_gap_core::gap::{
    gap_probability, gap_probability_with, hn_ode_report, mc_gap_probability, H_RESIDUALS,
};
use jacobi_gap_core::ladder::{
    default_z_samples, identity_residuals, SAMPLED_IDENTITIES, SCALAR_IDENTITIES,
};
use jacobi_gap_core::numerics::{default_step, Complex};
use jacobi_gap_core::orthopoly::{build_table, RecurrenceTable};
use jacobi_gap_core::weight::WeightParams;
use jacobi_gap_core::{Error as CoreError, Precision, Real, ResidualReport};
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::table::{fmt_f64, Table};
use crate::tolerance::DEGENERATE_STATUS;

fn status_of(e: &CoreError) -> String {
    match e {
        CoreError::DegeneratePoint { .. } | CoreError::ZeroDenominator { .. } => {
            format!("{DEGENERATE_STATUS}{e}")
        }
        _ => e.to_string(),
    }
}

/// The table plus the discretization sizes used to produce it.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: Table,
    pub node_counts: BTreeMap<String, usize>,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.command {
        Command::GapTable => gap_table(cfg),
        Command::VerifyIdentities => verify_identities(cfg),
        Command::OdeResiduals => ode_residuals(cfg),
        Command::ScalingScan => scaling_scan(cfg),
        Command::FredholmSigma => fredholm_sigma(cfg),
        Command::McCheck => mc_check(cfg),
    }
}

struct Fmt {
    digits: usize,
}

impl Fmt {
    fn new(prec: Precision) -> Self {
        Self {
            digits: prec.decimal_digits(),
        }
    }

    fn real(&self, x: &Real) -> String {
        x.to_decimal(self.digits)
    }
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn node_key(kind: &str, label: &str, x: &Real) -> String {
    format!("{kind}[{label}={}]", x.to_decimal(17))
}

fn gapped_tables(
    alpha: &Real,
    a_values: &[Real],
    n_max: usize,
    prec: Precision,
) -> Result<Vec<RecurrenceTable>> {
    a_values
        .par_iter()
        .map(|a| {
            let wp = WeightParams::new(alpha.clone(), a.clone())?;
            Ok(build_table(&wp, n_max, prec)?)
        })
        .collect()
}

fn gap_table(cfg: &RunConfig) -> Result<RunOutput> {
    let prec = cfg.precision()?;
    let f = Fmt::new(prec);
    let alpha = cfg.alpha()?;
    let ns = cfg.n_values()?;
    let a_values = cfg.a_values()?;
    let n_max = *ns.iter().max().unwrap();
    let full = build_table(
        &WeightParams::new(alpha.clone(), Real::zero(prec))?,
        n_max,
        prec,
    )?;
    let tables = gapped_tables(&alpha, &a_values, n_max, prec)?;
    let mut table = Table::new(columns(&["a", "n", "P", "H", "logdP"]));
    let mut node_counts = BTreeMap::new();
    node_counts.insert("stieltjes_nodes[a=0]".into(), full.nodes_per_interval());
    for (a, t) in a_values.iter().zip(&tables) {
        node_counts.insert(node_key("stieltjes_nodes", "a", a), t.nodes_per_interval());
        for &n in &ns {
            let g = gap_probability_with(t, &full, n)?;
            table.push(vec![
                f.real(a),
                n.to_string(),
                f.real(&g.prob),
                f.real(&g.h_quantity),
                f.real(&g.log_derivative),
            ])?;
        }
    }
    Ok(RunOutput { table, node_counts })
}

fn report_cells(report: &ResidualReport, names: &[String]) -> Vec<String> {
    names
        .iter()
        .map(|k| report.get(k).map(fmt_f64).unwrap_or_default())
        .collect()
}

fn verify_identities(cfg: &RunConfig) -> Result<RunOutput> {
    let prec = cfg.precision()?;
    let f = Fmt::new(prec);
    let alpha = cfg.alpha()?;
    let ns = cfg.n_values()?;
    let a_values = cfg.a_values()?;
    let n_max = *ns.iter().max().unwrap() + 2;
    let tables = gapped_tables(&alpha, &a_values, n_max, prec)?;
    let z = default_z_samples(prec);

    let mut names: Vec<String> = SCALAR_IDENTITIES.iter().map(|s| s.to_string()).collect();
    for base in SAMPLED_IDENTITIES {
        for k in 0..z.len() {
            names.push(format!("{base}[{k}]"));
        }
    }
    let mut header = columns(&["a", "n"]);
    header.extend(names.iter().cloned());
    header.push("status".into());

    let cells: Vec<(usize, usize)> = (0..a_values.len())
        .flat_map(|ai| ns.iter().map(move |&n| (ai, n)))
        .collect();
    let rows: Vec<Vec<String>> = cells
        .par_iter()
        .map(|&(ai, n)| {
            let mut row = vec![f.real(&a_values[ai]), n.to_string()];
            match identity_residuals(&tables[ai], n, &z) {
                Ok(report) => {
                    row.extend(report_cells(&report, &names));
                    row.push("ok".into());
                }
                Err(e) => {
                    row.extend(names.iter().map(|_| String::new()));
                    row.push(e.to_string());
                }
            }
            row
        })
        .collect();
    let mut table = Table::new(header);
    for row in rows {
        table.push(row)?;
    }
    let node_counts = a_values
        .iter()
        .zip(&tables)
        .map(|(a, t)| (node_key("stieltjes_nodes", "a", a), t.nodes_per_interval()))
        .collect();
    Ok(RunOutput { table, node_counts })
}

fn ode_residuals(cfg: &RunConfig) -> Result<RunOutput> {
    let prec = cfg.precision()?;
    let f = Fmt::new(prec);
    let alpha = cfg.alpha()?;
    let ns = cfg.n_values()?;
    let a_values = cfg.a_values()?;
    let step = cfg.step()?.unwrap_or_else(|| default_step(prec));
    let n_max = *ns.iter().max().unwrap() + 1;

    let names: Vec<String> = RICCATI_RESIDUALS
        .iter()
        .chain(SECOND_ORDER_RESIDUALS)
        .chain(H_RESIDUALS)
        .map(|s| s.to_string())
        .collect();
    let mut header = columns(&["a", "n"]);
    header.extend(names.iter().cloned());
    header.push("status".into());

    let families: Vec<std::result::Result<TableFamily, String>> = a_values
        .par_iter()
        .map(|a| {
            if a.is_zero() {
                return Err(format!("{DEGENERATE_STATUS}a = 0 is the symmetric point"));
            }
            let wp = WeightParams::new(alpha.clone(), a.clone()).map_err(|e| e.to_string())?;
            TableFamily::build_with_step(&wp, n_max, step.clone(), prec).map_err(|e| e.to_string())
        })
        .collect();
    let cells: Vec<(usize, usize)> = (0..a_values.len())
        .flat_map(|ai| ns.iter().map(move |&n| (ai, n)))
        .collect();
    let rows: Vec<Vec<String>> = cells
        .par_iter()
        .map(|&(ai, n)| {
            let mut row = vec![f.real(&a_values[ai]), n.to_string()];
            let fam = match &families[ai] {
                Ok(fam) => fam,
                Err(e) => {
                    row.extend(names.iter().map(|_| String::new()));
                    row.push(e.clone());
                    return row;
                }
            };
            let mut merged = ResidualReport::new();
            let mut problems = Vec::new();
            match riccati_residuals(fam, n) {
                Ok(r) => merged.merge(r),
                Err(e) => problems.push(status_of(&e)),
            }
            match second_order_residuals(fam, n) {
                Ok(r) => merged.merge(r),
                Err(e) => problems.push(status_of(&e)),
            }
            match hn_ode_report(fam, n) {
                Ok(r) => merged.merge(r.residuals),
                Err(e) => problems.push(status_of(&e)),
            }
            row.extend(report_cells(&merged, &names));
            problems.dedup();
            let status = match problems.len() {
                0 => "ok".to_string(),
                _ if problems.iter().all(|p| p.starts_with(DEGENERATE_STATUS)) => {
                    let parts: Vec<&str> = problems
                        .iter()
                        .map(|p| &p[DEGENERATE_STATUS.len()..])
                        .collect();
                    format!("{DEGENERATE_STATUS}{}", parts.join("; "))
                }
                _ => problems.join("; "),
            };
            row.push(status);
            row
        })
        .collect();
    let mut table = Table::new(header);
    for row in rows {
        table.push(row)?;
    }
    let node_counts = a_values
        .iter()
        .zip(&families)
        .filter_map(|(a, fam)| {
            fam.as_ref().ok().map(|fam| {
                (
                    node_key("stieltjes_nodes", "a", a),
                    fam.center().nodes_per_interval(),
                )
            })
        })
        .collect();
    Ok(RunOutput { table, node_counts })
}

fn scaling_scan(cfg: &RunConfig) -> Result<RunOutput> {
    let prec = cfg.precision()?;
    let f = Fmt::new(prec);
    let alpha = cfg.alpha()?;
    let ns = cfg.n_values()?;
    let ts = cfg.t_values()?;
    let cells = scaling_convergence(&alpha, &ns, &ts, prec)?;
    let mut table = Table::new(columns(&[
        "n",
        "t",
        "a",
        "sigma_n",
        "sigma_oracle",
        "error",
        "relative_error",
    ]));
    let floor = Real::from_f64(0.1, prec);
    for c in &cells {
        let scale = c.sigma_oracle.abs().max_ref(&floor).clone();
        table.push(vec![
            c.n.to_string(),
            f.real(&c.t),
            f.real(&c.a),
            f.real(&c.sigma_n),
            f.real(&c.sigma_oracle),
            f.real(&c.error),
            fmt_f64((&c.error / scale).to_f64()),
        ])?;
    }
    Ok(RunOutput {
        table,
        node_counts: BTreeMap::new(),
    })
}

fn fredholm_sigma(cfg: &RunConfig) -> Result<RunOutput> {
    let prec = cfg.precision()?;
    let f = Fmt::new(prec);
    let ts = cfg.t_values()?;
    let rows = ts
        .par_iter()
        .map(|t| -> Result<(Vec<String>, usize, usize)> {
            let o = sigma_oracle(t, prec)?;
            let limit = scaled_limit_residual(&o.sigma, &o.sigma_p, &o.sigma_pp, t, 1.0);
            let c = continued_sigma(t, prec)?;
            let tau = Complex::from_real(t.clone());
            let pv = jacobi_gap_core::fredholm::sigma_pv_residual_complex(
                &c.sigma,
                &c.sigma_p,
                &c.sigma_pp,
                &tau,
                [0.0; 4],
            );
            let row = vec![
                f.real(t),
                f.real(&o.det_value),
                f.real(&o.sigma),
                f.real(&o.sigma_p),
                f.real(&o.sigma_pp),
                fmt_f64(limit.abs().to_f64()),
                fmt_f64(pv.abs().to_f64()),
            ];
            Ok((row, o.nodes_used, c.nodes_used))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(columns(&[
        "t",
        "det",
        "sigma",
        "sigma_p",
        "sigma_pp",
        "limit_residual",
        "pv_residual",
    ]));
    let mut node_counts = BTreeMap::new();
    for (t, (row, m_real, m_complex)) in ts.iter().zip(rows) {
        node_counts.insert(node_key("nystrom_nodes", "t", t), m_real);
        node_counts.insert(node_key("nystrom_nodes_continued", "t", t), m_complex);
        table.push(row)?;
    }
    Ok(RunOutput { table, node_counts })
}

fn mc_check(cfg: &RunConfig) -> Result<RunOutput> {
    let prec = cfg.precision()?;
    let f = Fmt::new(prec);
    let alpha = cfg.alpha()?;
    let ns = cfg.n_values()?;
    let a_values = cfg.a_values()?;
    let mut table = Table::new(columns(&[
        "n",
        "a",
        "alpha",
        "samples",
        "estimate",
        "stderr",
        "reference",
        "z_score",
    ]));
    for a in &a_values {
        for &n in &ns {
            let wp = WeightParams::new(alpha.clone(), a.clone())?;
            let est = mc_gap_probability(&wp, n, cfg.samples, cfg.seed)?;
            let reference = gap_probability(&wp, n, prec)?.prob;
            let z = (est.estimate - reference.to_f64()).abs() / est.stderr;
            table.push(vec![
                n.to_string(),
                f.real(a),
                f.real(&alpha),
                cfg.samples.to_string(),
                fmt_f64(est.estimate),
                fmt_f64(est.stderr),
                f.real(&reference),
                fmt_f64(z),
            ])?;
        }
    }
    Ok(RunOutput {
        table,
        node_counts: BTreeMap::new(),
    })
}
