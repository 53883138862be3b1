//! Monic orthogonal polynomials for the gapped weight: recurrence
//! coefficients `β_n(a)`, norms `h_n(a)` and the sub-leading coefficient
//! `p(n, a)` of `P_n(x) = x^n + p(n, a) x^{n-2} + ...`.
//!
//! Coefficients come from the discretized Stieltjes procedure on the
//! composite [`ComplementRule`](crate::weight::ComplementRule). The weight is
//! even and the rule exactly mirrored, so the diagonal recurrence
//! coefficients vanish and only the right half of the rule is visited.

use crate::error::{Error, Result};
use crate::numerics::{Complex, Precision, Real};
use crate::weight::{complement_rule, WeightParams};

/// Upper bound on nodes per interval during node doubling.
pub const MAX_NODES_PER_INTERVAL: usize = 1 << 14;

#[derive(Debug, Clone)]
pub struct RecurrenceTable {
    wp: WeightParams,
    /// `beta[0]` is the placeholder `β_0 = 0`.
    beta: Vec<Real>,
    h: Vec<Real>,
    p_coef: Vec<Real>,
    nodes_per_interval: usize,
}

#[derive(Debug, Clone)]
pub struct PolyEval {
    pub n: usize,
    pub x: Real,
    pub value: Real,
    /// `P_{n-1}(x)`, zero for `n = 0`.
    pub value_prev: Real,
}

impl RecurrenceTable {
    pub fn weight(&self) -> &WeightParams {
        &self.wp
    }

    pub fn alpha(&self) -> &Real {
        self.wp.alpha()
    }

    pub fn a(&self) -> &Real {
        self.wp.a()
    }

    pub fn precision(&self) -> Precision {
        self.wp.precision()
    }

    pub fn n_max(&self) -> usize {
        self.h.len() - 1
    }

    pub fn nodes_per_interval(&self) -> usize {
        self.nodes_per_interval
    }

    /// `β_n` for `0 <= n <= n_max` (with `β_0 = 0`).
    pub fn beta(&self, n: usize) -> &Real {
        &self.beta[n]
    }

    pub fn h(&self, n: usize) -> &Real {
        &self.h[n]
    }

    pub fn p_coef(&self, n: usize) -> &Real {
        &self.p_coef[n]
    }

    pub fn betas(&self) -> &[Real] {
        &self.beta
    }

    pub fn norms(&self) -> &[Real] {
        &self.h
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            return Err(Error::InvalidParameter(format!(
                "degree {n} exceeds table size {}",
                self.n_max()
            )));
        }
        Ok(())
    }
}

/// Runs the Stieltjes recurrence on a fixed rule with `m` nodes per interval.
pub fn build_table_with_nodes(
    wp: &WeightParams,
    n_max: usize,
    m: usize,
    prec: Precision,
) -> Result<RecurrenceTable> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let wp = WeightParams::new(wp.alpha().with_precision(prec), wp.a().with_precision(prec))?;
    let rule = complement_rule(&wp, m, prec)?;
    let xs = &rule.right.nodes;
    let ws = &rule.right.weights;

    let mut p_prev: Vec<Real> = vec![Real::zero(prec); xs.len()];
    let mut p_cur: Vec<Real> = vec![Real::one(prec); xs.len()];
    let mut beta = vec![Real::zero(prec)];
    let mut h = Vec::with_capacity(n_max + 1);
    let norm = |vals: &[Real]| -> Real {
        let mut acc = Real::zero(prec);
        for (v, w) in vals.iter().zip(ws) {
            acc += v.square() * w;
        }
        acc.mul_pow2(1)
    };
    h.push(norm(&p_cur));
    for k in 0..n_max {
        let b = &beta[k];
        let next: Vec<Real> = xs
            .iter()
            .zip(p_cur.iter().zip(&p_prev))
            .map(|(x, (pc, pp))| x * pc - b * pp)
            .collect();
        p_prev = std::mem::replace(&mut p_cur, next);
        let hk = norm(&p_cur);
        if !hk.is_sign_positive() {
            return Err(Error::LostPositivity {
                n: k + 1,
                required_bits: prec.bits() * 2,
            });
        }
        beta.push(&hk / &h[k]);
        h.push(hk);
    }
    let mut p_coef = vec![Real::zero(prec); n_max + 1];
    for n in 2..=n_max {
        p_coef[n] = &p_coef[n - 1] - &beta[n - 1];
    }
    Ok(RecurrenceTable {
        wp,
        beta,
        h,
        p_coef,
        nodes_per_interval: m,
    })
}

fn max_relative_change(coarse: &RecurrenceTable, fine: &RecurrenceTable) -> Real {
    let prec = fine.precision();
    let mut worst = Real::zero(prec);
    for (c, f) in coarse.beta.iter().zip(&fine.beta).skip(1) {
        let rel = ((c - f) / f).abs();
        if rel > worst {
            worst = rel;
        }
    }
    worst
}

/// Builds `β_n, h_n, p(n, a)` for `n <= n_max`, doubling the node count
/// until every `β_n` changes by less than `2^(-bits/2)` relative.
pub fn build_table(wp: &WeightParams, n_max: usize, prec: Precision) -> Result<RecurrenceTable> {
    let tol = prec.pow2(-(prec.bits() as i32) / 2);
    let mut m = n_max + 32;
    let mut coarse = build_table_with_nodes(wp, n_max, m, prec)?;
    loop {
        m *= 2;
        if m > MAX_NODES_PER_INTERVAL {
            return Err(Error::NonConvergence {
                what: format!("Stieltjes node doubling for n_max = {n_max}"),
                budget: MAX_NODES_PER_INTERVAL,
            });
        }
        let fine = build_table_with_nodes(wp, n_max, m, prec)?;
        if max_relative_change(&coarse, &fine) < tol {
            return Ok(fine);
        }
        coarse = fine;
    }
}

/// `P_n(x)` and `P_{n-1}(x)` by forward recurrence.
pub fn eval_monic(table: &RecurrenceTable, n: usize, x: &Real) -> Result<PolyEval> {
    table.check_degree(n)?;
    let prec = table.precision();
    let mut prev = Real::zero(prec);
    let mut cur = Real::one(prec);
    for k in 0..n {
        let next = x * &cur - &table.beta[k] * &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(PolyEval {
        n,
        x: x.clone(),
        value: cur,
        value_prev: prev,
    })
}

/// Complex-argument evaluation, returning `(P_n(z), P_{n-1}(z))`.
pub fn eval_monic_complex(
    table: &RecurrenceTable,
    n: usize,
    z: &Complex,
) -> Result<(Complex, Complex)> {
    table.check_degree(n)?;
    let prec = table.precision();
    let mut prev = Complex::from_f64(0.0, 0.0, prec);
    let mut cur = Complex::from_f64(1.0, 0.0, prec);
    for k in 0..n {
        let next = z * &cur - prev.scale(&table.beta[k]);
        prev = std::mem::replace(&mut cur, next);
    }
    Ok((cur, prev))
}

/// `(P_n(x), P_n'(x))` with the derivative taken in `x` through the
/// differentiated recurrence.
pub fn eval_monic_with_derivative(
    table: &RecurrenceTable,
    n: usize,
    x: &Real,
) -> Result<(Real, Real)> {
    table.check_degree(n)?;
    let prec = table.precision();
    let (mut prev, mut cur) = (Real::zero(prec), Real::one(prec));
    let (mut dprev, mut dcur) = (Real::zero(prec), Real::zero(prec));
    for k in 0..n {
        let next = x * &cur - &table.beta[k] * &prev;
        let dnext = &cur + x * &dcur - &table.beta[k] * &dprev;
        prev = std::mem::replace(&mut cur, next);
        dprev = std::mem::replace(&mut dcur, dnext);
    }
    Ok((cur, dcur))
}

/// `n(n + 2α) / ((2n + 2α + 1)(2n + 2α - 1))`, the ungapped (Gegenbauer) value of `β_n`.
pub fn gegenbauer_beta(n: usize, alpha: &Real) -> Real {
    let nf = n as f64;
    let s = alpha.mul_pow2(1) + 2.0 * nf;
    nf * (alpha.mul_pow2(1) + nf) / ((&s + 1.0) * (&s - 1.0))
}
