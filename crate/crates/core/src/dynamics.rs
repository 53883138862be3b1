//! Evolution of the recurrence data in the gap half-width `a`: derivative
//! bundles (closed-form chain or finite differences over a local a-grid),
//! the coupled Riccati pair for `R_n, r_n` and the second-order equations
//! obtained by eliminating one of them.
//!
//! Residuals here always take their derivatives from finite differences so
//! that the eliminations themselves are exercised.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ladder::ladder_state;
use crate::numerics::{default_step, fd_derivative, Precision, Real};
use crate::orthopoly::{build_table, build_table_with_nodes, eval_monic, RecurrenceTable};
use crate::report::{normalized_residual, ResidualReport};
use crate::weight::WeightParams;

/// Half-width of the local grid; five tables cover first and second derivatives.
const GRID_HALF: usize = 2;

/// Recurrence tables on `a + k * step`, `k = -2..=2`, all sharing one node count.
#[derive(Debug, Clone)]
pub struct TableFamily {
    step: Real,
    tables: Vec<RecurrenceTable>,
}

impl TableFamily {
    /// Builds the family around `wp.a()` with the default step `2^(-bits/4)`.
    pub fn build(wp: &WeightParams, n_max: usize, prec: Precision) -> Result<Self> {
        Self::build_with_step(wp, n_max, default_step(prec), prec)
    }

    pub fn build_with_step(
        wp: &WeightParams,
        n_max: usize,
        step: Real,
        prec: Precision,
    ) -> Result<Self> {
        if !step.is_sign_positive() || step.is_zero() {
            return Err(Error::InvalidParameter("grid step must be positive".into()));
        }
        let step = step.with_precision(prec);
        let reach = &step * GRID_HALF as f64;
        let a = wp.a().with_precision(prec);
        if &a - &reach < 0.0 || &a + &reach >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "a-grid around {} with step {} leaves [0, 1)",
                a.to_f64(),
                step.to_f64()
            )));
        }
        let center = build_table(wp, n_max, prec)?;
        let m = center.nodes_per_interval();
        let offsets: Vec<i64> = (-(GRID_HALF as i64)..=GRID_HALF as i64).collect();
        let built: Vec<Result<Option<RecurrenceTable>>> = offsets
            .par_iter()
            .map(|&k| {
                if k == 0 {
                    return Ok(None);
                }
                let shifted = wp.with_gap(&a + &step * k as f64)?;
                build_table_with_nodes(&shifted, n_max, m, prec).map(Some)
            })
            .collect();
        let mut tables = Vec::with_capacity(offsets.len());
        let mut center = Some(center);
        for t in built {
            match t? {
                Some(t) => tables.push(t),
                None => tables.push(center.take().expect("single centre")),
            }
        }
        Ok(Self { step, tables })
    }

    pub fn center(&self) -> &RecurrenceTable {
        &self.tables[GRID_HALF]
    }

    pub fn tables(&self) -> &[RecurrenceTable] {
        &self.tables
    }

    pub fn step(&self) -> &Real {
        &self.step
    }

    pub fn a(&self) -> &Real {
        self.center().a()
    }

    pub fn n_max(&self) -> usize {
        self.center().n_max()
    }

    pub fn precision(&self) -> Precision {
        self.center().precision()
    }

    /// Finite-difference derivative of a per-table quantity.
    pub fn derivative<F>(&self, order: u8, f: F) -> Result<Real>
    where
        F: Fn(&RecurrenceTable) -> Result<Real>,
    {
        let samples = self
            .tables
            .iter()
            .map(|t| Ok((t.a().clone(), f(t)?)))
            .collect::<Result<Vec<_>>>()?;
        fd_derivative(&samples, order, &self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// First derivatives in `a` of `β_n, h_n, r_n, R_n`.
#[derive(Debug, Clone)]
pub struct DerivBundle {
    pub n: usize,
    pub a: Real,
    pub beta_p: Real,
    pub h_p: Real,
    pub r_p: Real,
    pub big_r_p: Real,
    pub mode: DerivativeMode,
}

fn big_r_of(t: &RecurrenceTable, n: usize) -> Result<Real> {
    Ok(ladder_state(t, n)?.big_r)
}

fn r_of(t: &RecurrenceTable, n: usize) -> Result<Real> {
    Ok(ladder_state(t, n)?.r)
}

fn check_index(n_max: usize, n: usize) -> Result<()> {
    if n == 0 || n + 1 > n_max {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= n <= n_max - 1, got n = {n} with n_max = {n_max}"
        )));
    }
    Ok(())
}

/// Closed-form chain at a single table; no grid needed, so `a = 0` is allowed.
pub fn analytic_bundle(table: &RecurrenceTable, n: usize) -> Result<DerivBundle> {
    check_index(table.n_max(), n)?;
    let a = table.a().clone();
    let alpha = table.alpha();
    let beta = table.beta(n);
    let s = ladder_state(table, n)?;
    let s_prev = ladder_state(table, n - 1)?;
    let p = eval_monic(table, n, &a)?;
    let w_edge = table.weight().edge_value();
    let one_m_a2 = 1.0 - a.square();
    let k_plus = alpha.mul_pow2(1) + (2 * n + 1) as f64;

    let beta_p = beta * (&s_prev.big_r - &s.big_r);
    let h_p = -(w_edge * p.value.square()).mul_pow2(1);
    let r_p = ((beta * &s.big_r).mul_pow2(1) + &k_plus * &beta_p) / &one_m_a2;
    let big_r_p = if a.is_zero() {
        // r_n(a)/a -> r_n'(0) and r_n(0) = 0
        s.big_r.square() - (&r_p * &s.big_r).mul_pow2(1)
    } else {
        let a2_m1 = a.square() - 1.0;
        s.big_r.square() + (&a * (alpha + n as f64)).mul_pow2(1) * &s.big_r / &a2_m1
            - (&s.r * &s.big_r).mul_pow2(1) / &a
            - (&k_plus * &s.r).mul_pow2(1) / &a2_m1
    };
    Ok(DerivBundle {
        n,
        a,
        beta_p,
        h_p,
        r_p,
        big_r_p,
        mode: DerivativeMode::Analytic,
    })
}

pub fn derivative_bundle(
    family: &TableFamily,
    n: usize,
    mode: DerivativeMode,
) -> Result<DerivBundle> {
    check_index(family.n_max(), n)?;
    match mode {
        DerivativeMode::Analytic => analytic_bundle(family.center(), n),
        DerivativeMode::FiniteDifference => Ok(DerivBundle {
            n,
            a: family.a().clone(),
            beta_p: family.derivative(1, |t| Ok(t.beta(n).clone()))?,
            h_p: family.derivative(1, |t| Ok(t.h(n).clone()))?,
            r_p: family.derivative(1, |t| r_of(t, n))?,
            big_r_p: family.derivative(1, |t| big_r_of(t, n))?,
            mode,
        }),
    }
}

/// Values and first two derivatives of one quantity.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: Real,
    pub d1: Real,
    pub d2: Real,
}

impl Jet {
    fn from_family<F>(family: &TableFamily, f: F) -> Result<Self>
    where
        F: Fn(&RecurrenceTable) -> Result<Real>,
    {
        Ok(Self {
            value: f(family.center())?,
            d1: family.derivative(1, &f)?,
            d2: family.derivative(2, &f)?,
        })
    }
}

/// Everything the residual formulas consume at one `(n, a)`.
#[derive(Debug, Clone)]
pub struct ProbePoint {
    pub n: usize,
    pub a: Real,
    pub alpha: Real,
    pub beta: Jet,
    pub big_r: Jet,
    pub r: Jet,
    pub big_r_prev: Real,
    pub p_coef_p: Real,
}

impl ProbePoint {
    pub fn from_family(family: &TableFamily, n: usize) -> Result<Self> {
        check_index(family.n_max(), n)?;
        let center = family.center();
        Ok(Self {
            n,
            a: family.a().clone(),
            alpha: center.alpha().clone(),
            beta: Jet::from_family(family, |t| Ok(t.beta(n).clone()))?,
            big_r: Jet::from_family(family, |t| big_r_of(t, n))?,
            r: Jet::from_family(family, |t| r_of(t, n))?,
            big_r_prev: big_r_of(center, n - 1)?,
            p_coef_p: family.derivative(1, |t| Ok(t.p_coef(n).clone()))?,
        })
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `2n + 2α + 1`
    fn k_plus(&self) -> Real {
        self.alpha.mul_pow2(1) + (2.0 * self.nf() + 1.0)
    }

    /// `n + α`
    fn n_alpha(&self) -> Real {
        &self.alpha + self.nf()
    }

    /// `n^2 + 2nα`
    fn n_sq_2na(&self) -> Real {
        self.nf() * (self.alpha.mul_pow2(1) + self.nf())
    }

    /// Reports `a = 0`, `R_n ≈ 0` and `a R_n + 2n + 2α + 1 = 0`.
    pub fn check_degenerate(&self) -> Result<()> {
        let prec = self.a.precision();
        let fail = |factor: &str| {
            Err(Error::DegeneratePoint {
                n: self.n,
                a: self.a.to_f64(),
                factor: factor.into(),
            })
        };
        if self.a.is_zero() {
            return fail("a");
        }
        let tiny = prec.pow2(-(prec.bits() as i32) / 2);
        if self.big_r.value.abs() < tiny {
            return fail("R_n(a), the edge value P_n(a) vanishes");
        }
        if (&self.a * &self.big_r.value + self.k_plus()).abs() < tiny {
            return fail("a R_n(a) + 2n + 2α + 1");
        }
        Ok(())
    }
}

/// `β_n` rebuilt from `R_n, r_n` alone.
pub fn reconstruct_beta(p: &ProbePoint) -> Real {
    let a = &p.a;
    let big_r = &p.big_r.value;
    let r = &p.r.value;
    let kp = p.k_plus();
    let r2 = r.square();
    let num = ((1.0 - a.square()) * &r2 + p.n_alpha().mul_pow2(1) * r + p.n_sq_2na()) * big_r
        - &kp * a * &r2;
    let den = (&kp - 2.0) * big_r * (a * big_r + &kp);
    num / den
}

fn riccati_r_terms(p: &ProbePoint) -> Vec<Real> {
    let a = &p.a;
    let big_r = &p.big_r.value;
    let r = &p.r.value;
    let a2_m1 = a.square() - 1.0;
    let kp = p.k_plus();
    vec![
        p.big_r.d1.clone(),
        -big_r.square(),
        -(a * p.n_alpha()).mul_pow2(1) * big_r / &a2_m1,
        (r * big_r).mul_pow2(1) / a,
        (&kp * r).mul_pow2(1) / &a2_m1,
    ]
}

fn riccati_small_r_terms(p: &ProbePoint) -> Vec<Real> {
    let a = &p.a;
    let big_r = &p.big_r.value;
    let r = &p.r.value;
    let a2 = a.square();
    let kp = p.k_plus();
    let r2 = r.square();
    let big_r2 = big_r.square();
    vec![
        &p.r.d1 * (1.0 - &a2) * big_r * (a * big_r + &kp),
        -((&a2 - 1.0) * &big_r2 * &r2),
        -(a * &kp * big_r * &r2).mul_pow2(1),
        -(kp.square() * &r2),
        p.n_alpha().mul_pow2(1) * &big_r2 * r,
        p.n_sq_2na() * &big_r2,
    ]
}

fn beta_from_ratio_terms(p: &ProbePoint) -> Vec<Real> {
    vec![
        p.beta.d1.clone(),
        -(p.r.value.square() / &p.big_r.value),
        &p.beta.value * &p.big_r.value,
    ]
}

fn r_from_ratio_terms(p: &ProbePoint) -> Vec<Real> {
    let one_m_a2 = 1.0 - p.a.square();
    let kp = p.k_plus();
    vec![
        p.r.d1.clone(),
        -(&kp * p.r.value.square() / (&one_m_a2 * &p.big_r.value)),
        (&kp - 2.0) * &p.beta.value * &p.big_r.value / &one_m_a2,
    ]
}

fn r_derivative_terms(p: &ProbePoint) -> Vec<Real> {
    vec![
        (1.0 - p.a.square()) * &p.r.d1,
        -(&p.beta.value * &p.big_r.value).mul_pow2(1),
        -(p.k_plus() * &p.beta.d1),
    ]
}

fn subleading_derivative_terms(p: &ProbePoint) -> Vec<Real> {
    vec![
        p.p_coef_p.clone(),
        -(&p.a * &p.r.value),
        &p.beta.value * &p.big_r.value,
    ]
}

fn beta_log_derivative_terms(p: &ProbePoint) -> Vec<Real> {
    vec![
        p.beta.d1.clone(),
        -(&p.beta.value * &p.big_r_prev),
        &p.beta.value * &p.big_r.value,
    ]
}

fn product_terms(p: &ProbePoint) -> Vec<Real> {
    let br = &p.beta.value * &p.big_r.value;
    vec![
        (&p.beta.d1 + &br) * &br,
        -(&p.beta.value * p.r.value.square()),
    ]
}

fn r_ode_terms(p: &ProbePoint) -> Vec<Real> {
    let a = &p.a;
    let al = &p.alpha;
    let nf = p.nf();
    let big_n = p.k_plus();
    let (rv, rp, rpp) = (&p.big_r.value, &p.big_r.d1, &p.big_r.d2);
    let a2 = a.square();
    let a2m1 = &a2 - 1.0;
    let a4 = a2.square();
    let n2 = nf * nf;
    let al2 = al.square();
    let c4 = &a4 * (24.0 * al + 24.0 * nf + 24.0 * n2 + 48.0 * nf * al + 24.0 * &al2 + 7.0)
        - &a2 * (24.0 * nf + 24.0 * n2 + 24.0 * al + 48.0 * nf * al + 20.0 * &al2 + 5.0)
        + (4.0 * al + 4.0 * nf + 4.0 * n2 + 8.0 * nf * al + 2.0);
    let c2 = (n2 + nf + (2.0 * nf + 1.0) * al + &al2) * &a2 - (n2 + nf) - (2.0 * nf + 1.0) * al;
    vec![
        (a * a2m1.square() * rv * (a * rv + &big_n) * (&a2m1 * rv + &big_n * a) * rpp).mul_pow2(1),
        -(a * a2m1.square()
            * (3.0 * a * &a2m1 * rv.square()
                + ((2.0 * &a2 - 1.0) * &big_n * rv).mul_pow2(1)
                + big_n.square() * a)
            * rp.square()),
        (&a2m1
            * &big_n
            * rv
            * ((2.0 * &a4 - &a2 + 1.0) * rv + (&a2 * a * &big_n).mul_pow2(1))
            * rp)
            .mul_pow2(1),
        -(&a2 * a2m1.powi(3) * rv.powi(6)),
        -(a * a2m1.square() * (2.0 * &a2 - 1.0) * &big_n * rv.powi(5)).mul_pow2(1),
        -(&a2m1 * c4 * rv.powi(4)),
        -(a * &a2m1
            * &big_n
            * (&a2 * big_n.square() - 2.0 * nf - 2.0 * n2 - 2.0 * al - 4.0 * nf * al)
            * rv.powi(3))
        .mul_pow2(2),
        -(&a2 * big_n.square() * c2 * rv.square()).mul_pow2(2),
    ]
}

fn small_r_ode_terms(p: &ProbePoint) -> Vec<Real> {
    let a = &p.a;
    let al = &p.alpha;
    let nf = p.nf();
    let na = p.n_alpha();
    let n2na = p.n_sq_2na();
    let (r, rp, rpp) = (&p.r.value, &p.r.d1, &p.r.d2);
    let a2 = a.square();
    let a2m1 = &a2 - 1.0;
    let a4 = a2.square();
    let al2 = al.square();
    let cubic = r.powi(3) * 4.0 + 6.0 * &na * r.square() + 2.0 * nf * (al.mul_pow2(1) + nf) * r;
    vec![
        &a2 * a2m1.powi(4) * rpp.square(),
        (&a2 * a2m1.square() * (a * &a2m1 * rp + cubic) * rpp).mul_pow2(2),
        -((a2m1.square()
            * ((&a2 + 1.0).square() * r.square()
                + ((&a2 + 1.0) * &a2 * &na * r).mul_pow2(1)
                + &a4 * (&na - 1.0) * (&na + 1.0))
            * rp.square())
        .mul_pow2(2)),
        (a * &a2
            * &a2m1
            * (r.powi(3) * 2.0 + 3.0 * &na * r.square() + nf * (al.mul_pow2(1) + nf) * r)
            * rp)
            .mul_pow2(4),
        -(a2m1.square() * r.powi(6)).mul_pow2(4),
        -((2.0 * &a4 - 3.0 * &a2 + 1.0) * &na * r.powi(5)).mul_pow2(5),
        -(&a2m1 * (5.0 * &a2 * &al2 + (6.0 * &a2 - 1.0) * &n2na) * r.powi(4)).mul_pow2(4),
        -(&a2 * &na * (&a2 * &al2 + &a2m1 * (2.0 * &n2na)) * r.powi(3)).mul_pow2(5),
        -(&a2 * &n2na * (&a2 * &al2 + &a2m1 * &n2na) * r.square()).mul_pow2(4),
    ]
}

fn beta_r_quadratic_terms(p: &ProbePoint) -> Vec<Real> {
    let kp = p.k_plus();
    let a2m1 = p.a.square() - 1.0;
    let (bp, rp) = (&p.beta.d1, &p.r.d1);
    vec![
        &kp * (&kp - 2.0) * bp.square(),
        (p.n_alpha() * &a2m1 * bp * rp).mul_pow2(2),
        a2m1.square() * rp.square(),
        -(&p.beta.value * p.r.value.square()).mul_pow2(2),
    ]
}

fn beta_r_linear_terms(p: &ProbePoint) -> Vec<Real> {
    let kp = p.k_plus();
    let a = &p.a;
    let one_m_a2 = 1.0 - a.square();
    let na = p.n_alpha();
    let r = &p.r.value;
    vec![
        &kp * (&kp - 2.0) * (&p.beta.value - a * &p.beta.d1),
        -(&one_m_a2 * r.square()),
        -(&na * r).mul_pow2(1),
        (&na * a * &one_m_a2 * &p.r.d1).mul_pow2(1),
        -p.n_sq_2na(),
    ]
}

/// Entries of [`riccati_residuals`], in reporting order.
pub const RICCATI_RESIDUALS: &[&str] = &[
    "riccati_big_r",
    "riccati_r",
    "beta_derivative_ratio",
    "beta_reconstruction",
    "r_derivative_ratio",
    "r_derivative",
    "subleading_derivative",
    "beta_log_derivative",
    "beta_r_product",
];

/// Entries of [`second_order_residuals`], in reporting order.
pub const SECOND_ORDER_RESIDUALS: &[&str] =
    &["ode_big_r", "ode_r", "beta_r_quadratic", "beta_r_linear"];

pub fn riccati_report(p: &ProbePoint) -> Result<ResidualReport> {
    p.check_degenerate()?;
    let mut report = ResidualReport::new();
    report.insert("riccati_big_r", normalized_residual(&riccati_r_terms(p)));
    report.insert("riccati_r", normalized_residual(&riccati_small_r_terms(p)));
    report.insert(
        "beta_derivative_ratio",
        normalized_residual(&beta_from_ratio_terms(p)),
    );
    let rebuilt = reconstruct_beta(p);
    report.insert(
        "beta_reconstruction",
        ((&rebuilt - &p.beta.value) / &p.beta.value).abs().to_f64(),
    );
    report.insert(
        "r_derivative_ratio",
        normalized_residual(&r_from_ratio_terms(p)),
    );
    report.insert("r_derivative", normalized_residual(&r_derivative_terms(p)));
    report.insert(
        "subleading_derivative",
        normalized_residual(&subleading_derivative_terms(p)),
    );
    report.insert(
        "beta_log_derivative",
        normalized_residual(&beta_log_derivative_terms(p)),
    );
    report.insert("beta_r_product", normalized_residual(&product_terms(p)));
    Ok(report)
}

pub fn second_order_report(p: &ProbePoint) -> Result<ResidualReport> {
    p.check_degenerate()?;
    let mut report = ResidualReport::new();
    report.insert("ode_big_r", normalized_residual(&r_ode_terms(p)));
    report.insert("ode_r", normalized_residual(&small_r_ode_terms(p)));
    report.insert(
        "beta_r_quadratic",
        normalized_residual(&beta_r_quadratic_terms(p)),
    );
    report.insert(
        "beta_r_linear",
        normalized_residual(&beta_r_linear_terms(p)),
    );
    Ok(report)
}

/// The Riccati pair, its ingredients and the `β_n` reconstruction, with
/// finite-difference derivatives.
pub fn riccati_residuals(family: &TableFamily, n: usize) -> Result<ResidualReport> {
    if family.a().is_zero() {
        return Err(Error::DegeneratePoint {
            n,
            a: 0.0,
            factor: "a".into(),
        });
    }
    riccati_report(&ProbePoint::from_family(family, n)?)
}

/// Second-order equations for `R_n` and `r_n` and the two `β_n, r_n` relations.
pub fn second_order_residuals(family: &TableFamily, n: usize) -> Result<ResidualReport> {
    second_order_report(&ProbePoint::from_family(family, n)?)
}

/// `|d/da ln P(a, n) + Σ_{j<n} R_j(a)|`, relative to the sum; the log-derivative
/// is differenced from `Σ ln h_j` over the grid.
pub fn log_probability_derivative_error(family: &TableFamily, n: usize) -> Result<f64> {
    if n > family.n_max() {
        return Err(Error::InvalidParameter(format!(
            "n = {n} exceeds table size"
        )));
    }
    let fd = family.derivative(1, |t| Ok(t.norms()[..n].iter().map(Real::ln).sum()))?;
    let sum: Real = (0..n)
        .map(|j| big_r_of(family.center(), j))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(normalized_residual(&[fd, sum]))
}
