//! Gauss–Jacobi rules at arbitrary precision.
//!
//! Nodes are found by Newton iteration on the monic Jacobi polynomial: a
//! double-precision pass from Chebyshev-like initial guesses (with deflation
//! against already-found roots) followed by Newton polishing at the working
//! precision. Weights use the Christoffel–Darboux form
//! `λ_i = h_{m-1} / (P_m'(x_i) P_{m-1}(x_i))` for monic polynomials.

use super::real::{Precision, Real};
use crate::error::{Error, Result};

const F64_NEWTON_BUDGET: usize = 100;

/// A weighted quadrature rule on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<Real>,
    pub weights: Vec<Real>,
    pub lo: Real,
    pub hi: Real,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn precision(&self) -> Precision {
        self.lo.precision()
    }

    pub fn integrate(&self, mut f: impl FnMut(&Real) -> Real) -> Real {
        let mut acc = Real::zero(self.precision());
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(x) * w;
        }
        acc
    }

    pub fn total_mass(&self) -> Real {
        self.integrate(|_| Real::one(self.precision()))
    }

    /// Pushes the rule through the affine map `u -> offset + scale * u`,
    /// multiplying weights by `|scale|` (and nothing else).
    pub fn affine(&self, offset: &Real, scale: &Real) -> QuadRule {
        let mut nodes: Vec<Real> = self.nodes.iter().map(|u| offset + scale * u).collect();
        let mut weights: Vec<Real> = self.weights.iter().map(|w| w * scale.abs()).collect();
        let mut lo = offset + scale * &self.lo;
        let mut hi = offset + scale * &self.hi;
        if scale.is_sign_negative() {
            nodes.reverse();
            weights.reverse();
            std::mem::swap(&mut lo, &mut hi);
        }
        QuadRule {
            nodes,
            weights,
            lo,
            hi,
        }
    }
}

/// Coefficients of the monic Jacobi recurrence `P_{k+1} = (x - a_k) P_k - b_k P_{k-1}`
/// for the weight `(1-x)^p (1+x)^q`.
struct JacobiRecurrence<T> {
    a: Vec<T>,
    b: Vec<T>,
}

fn jacobi_coeffs_f64(m: usize, p: f64, q: f64) -> JacobiRecurrence<f64> {
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for k in 0..m {
        let kf = k as f64;
        let s = 2.0 * kf + p + q;
        let ak = if k == 0 {
            (q - p) / (p + q + 2.0)
        } else {
            (q * q - p * p) / (s * (s + 2.0))
        };
        let bk = match k {
            0 => 0.0,
            1 => 4.0 * (1.0 + p) * (1.0 + q) / ((2.0 + p + q).powi(2) * (3.0 + p + q)),
            _ => 4.0 * kf * (kf + p) * (kf + q) * (kf + p + q) / (s * s * (s + 1.0) * (s - 1.0)),
        };
        a.push(ak);
        b.push(bk);
    }
    JacobiRecurrence { a, b }
}

fn jacobi_coeffs(m: usize, p: &Real, q: &Real) -> JacobiRecurrence<Real> {
    let prec = p.precision();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    let pq = p + q;
    for k in 0..m {
        let kf = k as f64;
        let s = 2.0 * kf + &pq;
        let ak = if k == 0 {
            (q - p) / (&pq + 2.0)
        } else {
            (q.square() - p.square()) / (&s * (&s + 2.0))
        };
        let bk = match k {
            0 => Real::zero(prec),
            1 => 4.0 * (1.0 + p) * (1.0 + q) / ((&pq + 2.0).square() * (&pq + 3.0)),
            _ => {
                4.0 * kf * (kf + p) * (kf + q) * (kf + &pq) / (s.square() * (&s + 1.0) * (&s - 1.0))
            }
        };
        a.push(ak);
        b.push(bk);
    }
    JacobiRecurrence { a, b }
}

/// Scaled monic recurrence: returns `(2^m P_m(x), 2^m P_m'(x), 2^{m-1} P_{m-1}(x))`.
/// The factor `2^k` keeps values O(1) for large `m`.
fn eval_f64(rec: &JacobiRecurrence<f64>, m: usize, x: f64) -> (f64, f64, f64) {
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for k in 0..m {
        let p_next = 2.0 * (x - rec.a[k]) * p - 4.0 * rec.b[k] * p_prev;
        let d_next = 2.0 * p + 2.0 * (x - rec.a[k]) * d - 4.0 * rec.b[k] * d_prev;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d, p_prev)
}

fn eval_real(rec: &JacobiRecurrence<Real>, m: usize, x: &Real) -> (Real, Real, Real) {
    let prec = x.precision();
    let (mut p_prev, mut p) = (Real::zero(prec), Real::one(prec));
    let (mut d_prev, mut d) = (Real::zero(prec), Real::zero(prec));
    for k in 0..m {
        let shifted = x - &rec.a[k];
        let four_b = &rec.b[k] * 4.0;
        let p_next = (&shifted * &p).mul_pow2(1) - &four_b * &p_prev;
        let d_next = p.mul_pow2(1) + (&shifted * &d).mul_pow2(1) - &four_b * &d_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        d_prev = std::mem::replace(&mut d, d_next);
    }
    (p, d, p_prev)
}

fn f64_roots(m: usize, p: f64, q: f64) -> Result<Vec<f64>> {
    let rec = jacobi_coeffs_f64(m, p, q);
    let mut roots: Vec<f64> = Vec::with_capacity(m);
    let denom = m as f64 + (p + q + 1.0) / 2.0;
    for k in 1..=m {
        let theta = std::f64::consts::PI * (k as f64 - 0.25 + p / 2.0) / denom;
        let mut x = theta.cos().clamp(-1.0 + 1e-15, 1.0 - 1e-15);
        let mut converged = false;
        for _ in 0..F64_NEWTON_BUDGET {
            let (f, df, _) = eval_f64(&rec, m, x);
            let deflation: f64 = roots.iter().map(|r| 1.0 / (x - r)).sum();
            let step = f / (df - f * deflation);
            if !step.is_finite() {
                break;
            }
            x -= step;
            if converged {
                break;
            }
            // one extra step after the absolute tolerance is met
            converged = step.abs() <= 1e-13;
        }
        if !converged || !(x > -1.0 && x < 1.0) {
            return Err(Error::NonConvergence {
                what: format!("Gauss-Jacobi node {k} of {m} (double-precision pass)"),
                budget: F64_NEWTON_BUDGET,
            });
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    Ok(roots)
}

/// `m`-point Gauss–Jacobi rule for `(1-x)^p (1+x)^q` on `(-1, 1)`.
pub fn gauss_jacobi_rule(m: usize, p: &Real, q: &Real, prec: Precision) -> Result<QuadRule> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "rule needs at least one node".into(),
        ));
    }
    if !(*p > -1.0) || !(*q > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "Jacobi exponents must exceed -1, got p = {p:?}, q = {q:?}"
        )));
    }
    let p = p.with_precision(prec);
    let q = q.with_precision(prec);
    let guesses = f64_roots(m, p.to_f64(), q.to_f64())?;
    let rec = jacobi_coeffs(m, &p, &q);

    // h_{m-1} = mu_0 * b_1 * ... * b_{m-1}, mu_0 = 2^{p+q+1} G(p+1) G(q+1) / G(p+q+2)
    let two = Real::from_f64(2.0, prec);
    let mu0 = two.powf(&(&p + &q + 1.0)) * (&p + 1.0).gamma() * (&q + 1.0).gamma()
        / (&p + &q + 2.0).gamma();
    let mut h_last = mu0;
    for b in rec.b.iter().take(m).skip(1) {
        h_last *= b;
    }
    // scaled values: P~_m' = 2^m P_m', P~_{m-1} = 2^{m-1} P_{m-1}
    let h_scaled = h_last.mul_pow2(2 * m as i32 - 1);

    // Newton from ~50 correct bits doubles each step.
    let polish_budget = (prec.bits() as f64 / 40.0).log2().ceil() as usize + 4;
    let tol = prec.eps_scaled(12);
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for (i, &g) in guesses.iter().enumerate() {
        let mut x = Real::from_f64(g, prec);
        let mut done = false;
        for _ in 0..polish_budget {
            let (f, df, _) = eval_real(&rec, m, &x);
            let step = f / df;
            x -= &step;
            if step.abs() <= tol {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::NonConvergence {
                what: format!("Gauss-Jacobi node {i} of {m} (extended-precision polish)"),
                budget: polish_budget,
            });
        }
        let (_, df, prev) = eval_real(&rec, m, &x);
        let w = &h_scaled / (df * prev);
        if !w.is_sign_positive() {
            return Err(Error::NonConvergence {
                what: format!("Gauss-Jacobi weight {i} of {m} (non-positive weight)"),
                budget: polish_budget,
            });
        }
        nodes.push(x);
        weights.push(w);
    }
    for pair in nodes.windows(2) {
        if pair[0] >= pair[1] {
            return Err(Error::NonConvergence {
                what: format!("Gauss-Jacobi nodes for m = {m} (duplicate roots)"),
                budget: F64_NEWTON_BUDGET,
            });
        }
    }
    Ok(QuadRule {
        nodes,
        weights,
        lo: Real::from_f64(-1.0, prec),
        hi: Real::from_f64(1.0, prec),
    })
}

pub fn gauss_legendre_rule(m: usize, prec: Precision) -> Result<QuadRule> {
    let zero = Real::zero(prec);
    gauss_jacobi_rule(m, &zero, &zero, prec)
}
