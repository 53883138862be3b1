//! The gapped symmetric Jacobi weight `w(x, a) = (1 - x^2)^α (1 - χ_(-a,a)(x))`,
//! its moments in closed form (incomplete Beta) and the composite quadrature
//! rule on `(-1, -a) ∪ (a, 1)`.

use crate::error::{Error, Result};
use crate::numerics::{gauss_jacobi_rule, Precision, QuadRule, Real};

const BETA_CF_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightParams {
    alpha: Real,
    a: Real,
}

impl WeightParams {
    /// Requires `α > 0` and `0 <= a < 1`.
    pub fn new(alpha: Real, a: Real) -> Result<Self> {
        if !alpha.is_sign_positive() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha:?}"
            )));
        }
        if a.is_sign_negative() || !(a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gap half-width must lie in [0, 1), got {a:?}"
            )));
        }
        let prec = alpha.precision().max(a.precision());
        Ok(Self {
            alpha: alpha.with_precision(prec),
            a: a.with_precision(prec),
        })
    }

    pub fn from_f64(alpha: f64, a: f64, prec: Precision) -> Result<Self> {
        Self::new(Real::from_f64(alpha, prec), Real::from_f64(a, prec))
    }

    pub fn alpha(&self) -> &Real {
        &self.alpha
    }

    pub fn a(&self) -> &Real {
        &self.a
    }

    pub fn precision(&self) -> Precision {
        self.alpha.precision()
    }

    /// Same exponent, different gap.
    pub fn with_gap(&self, a: Real) -> Result<Self> {
        Self::new(self.alpha.clone(), a)
    }

    /// The ungapped weight with the same exponent.
    pub fn without_gap(&self) -> Self {
        Self {
            alpha: self.alpha.clone(),
            a: Real::zero(self.precision()),
        }
    }

    /// `(1 - a^2)^α`, the weight at the gap edges.
    pub fn edge_value(&self) -> Real {
        (1.0 - self.a.square()).powf(&self.alpha)
    }

    /// `v0'(z) = 2αz / (1 - z^2)`, derivative of `v0 = -α ln(1 - x^2)`.
    pub fn potential_derivative(&self, z: &crate::numerics::Complex) -> crate::numerics::Complex {
        let num = z.scale(&self.alpha.mul_pow2(1));
        let den = (-(z * z)) + 1.0;
        &num / &den
    }
}

/// Value of `w(x, a)`; the closed gap edges `|x| = a` carry `(1 - a^2)^α`.
pub fn weight_eval(x: &Real, wp: &WeightParams) -> Result<Real> {
    let ax = x.abs();
    if ax > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "weight is supported on [-1, 1], got x = {x:?}"
        )));
    }
    if ax < *wp.a() {
        return Ok(Real::zero(wp.precision()));
    }
    Ok((1.0 - x.square()).powf(wp.alpha()))
}

/// Two mirrored rules integrating against `(1 - x^2)^e` on `(-1, -a)` and `(a, 1)`.
/// Weights include the full weight function, so `integrate(f)` approximates
/// `∫_{J^c} f(x) (1 - x^2)^e dx`.
#[derive(Debug, Clone)]
pub struct ComplementRule {
    pub left: QuadRule,
    pub right: QuadRule,
    pub exponent: Real,
}

impl ComplementRule {
    pub fn nodes_per_interval(&self) -> usize {
        self.right.len()
    }

    pub fn precision(&self) -> Precision {
        self.exponent.precision()
    }

    pub fn integrate(&self, mut f: impl FnMut(&Real) -> Real) -> Real {
        self.left.integrate(&mut f) + self.right.integrate(&mut f)
    }

    /// Integral of an even integrand using the right half only.
    pub fn integrate_even(&self, f: impl FnMut(&Real) -> Real) -> Real {
        self.right.integrate(f).mul_pow2(1)
    }
}

/// Composite rule for the weight `w(x, a)` itself.
pub fn complement_rule(wp: &WeightParams, m: usize, prec: Precision) -> Result<ComplementRule> {
    complement_rule_with_exponent(wp.alpha(), wp.a(), m, prec)
}

/// Composite rule for `(1 - x^2)^exponent` on `J^c`, `exponent > -1`.
///
/// The endpoint factor `(1 - x)^e` is absorbed exactly by an `(e, 0)`
/// Gauss–Jacobi rule under `x = (1 + a)/2 + (1 - a)/2 u`; the smooth factor
/// `(1 + x)^e` stays in the weights. The left rule is the mirror image.
pub fn complement_rule_with_exponent(
    exponent: &Real,
    a: &Real,
    m: usize,
    prec: Precision,
) -> Result<ComplementRule> {
    let e = exponent.with_precision(prec);
    let a = a.with_precision(prec);
    let zero = Real::zero(prec);
    let base = gauss_jacobi_rule(m, &e, &zero, prec)?;
    let half = (1.0 - &a).mul_pow2(-1);
    let centre = (1.0 + &a).mul_pow2(-1);
    let jac = half.powf(&(&e + 1.0));
    let mut right = base.affine(&centre, &half);
    for (x, w) in right.nodes.iter().zip(right.weights.iter_mut()) {
        // affine() already multiplied by `half`; the Jacobi factor contributes half^e
        *w = &*w / &half * &jac * (1.0 + x).powf(&e);
    }
    right.lo = a.clone();
    right.hi = Real::one(prec);
    let left = QuadRule {
        nodes: right.nodes.iter().rev().map(|x| -x).collect(),
        weights: right.weights.iter().rev().cloned().collect(),
        lo: Real::from_f64(-1.0, prec),
        hi: -&a,
    };
    Ok(ComplementRule {
        left,
        right,
        exponent: e,
    })
}

/// Continued fraction of the incomplete Beta function (modified Lentz),
/// valid for `x < (p + 1)/(p + q + 2)`.
fn beta_cf(p: &Real, q: &Real, x: &Real) -> Result<Real> {
    let prec = x.precision();
    let tiny = prec.pow2(-8 * prec.bits() as i32);
    let eps = prec.eps_scaled(1);
    let qab = p + q;
    let qap = p + 1.0;
    let qam = p - 1.0;
    let clamp = |v: Real| if v.abs() < tiny { tiny.clone() } else { v };
    let mut c = Real::one(prec);
    let mut d = clamp(1.0 - &qab * x / &qap);
    d = Real::one(prec) / d;
    let mut h = d.clone();
    for m in 1..=BETA_CF_BUDGET {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let aa = mf * (q - mf) * x / ((&qam + m2) * (p + m2));
        d = Real::one(prec) / clamp(1.0 + &aa * &d);
        c = clamp(1.0 + &aa / &c);
        h *= &d * &c;
        let aa = -((p + mf) * (&qab + mf) * x) / ((p + m2) * (&qap + m2));
        d = Real::one(prec) / clamp(1.0 + &aa * &d);
        c = clamp(1.0 + &aa / &c);
        let del = &d * &c;
        h *= &del;
        if (del - 1.0).abs() <= eps {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        what: "incomplete Beta continued fraction".into(),
        budget: BETA_CF_BUDGET,
    })
}

fn complete_beta(p: &Real, q: &Real) -> Real {
    p.gamma() * q.gamma() / (p + q).gamma()
}

/// Unregularized lower incomplete Beta `B_x(p, q)` for `0 <= x <= 1`.
pub fn incomplete_beta(x: &Real, p: &Real, q: &Real) -> Result<Real> {
    if x.is_zero() {
        return Ok(Real::zero(x.precision()));
    }
    if *x == 1.0 {
        return Ok(complete_beta(p, q));
    }
    let crossover = (p + 1.0) / (p + q + 2.0);
    if *x < crossover {
        let front = x.powf(p) * (1.0 - x).powf(q);
        Ok(front * beta_cf(p, q, x)? / p)
    } else {
        let y = 1.0 - x;
        let front = y.powf(q) * x.powf(p);
        Ok(complete_beta(p, q) - front * beta_cf(q, p, &y)? / q)
    }
}

/// `∫ x^k w(x, a) dx` over `[-1, 1]`, in closed form.
///
/// Odd moments vanish; `μ_{2j} = B(j + ½, α + 1) - B_{a²}(j + ½, α + 1)`.
pub fn moment(k: usize, wp: &WeightParams, prec: Precision) -> Result<Real> {
    if k % 2 == 1 {
        return Ok(Real::zero(prec));
    }
    let p = Real::from_f64(k as f64 / 2.0 + 0.5, prec);
    let q = wp.alpha().with_precision(prec) + 1.0;
    let x = wp.a().with_precision(prec).square();
    if x.is_zero() {
        return Ok(complete_beta(&p, &q));
    }
    let crossover = (&p + 1.0) / (&p + &q + 2.0);
    if x < crossover {
        Ok(complete_beta(&p, &q) - incomplete_beta(&x, &p, &q)?)
    } else {
        // upper tail directly: B(p,q) - B_x(p,q) = B_{1-x}(q,p)
        let y = 1.0 - &x;
        let front = y.powf(&q) * x.powf(&p);
        Ok(front * beta_cf(&q, &p, &y)? / &q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prec() -> Precision {
        Precision::default()
    }

    fn wp(alpha: f64, a: f64) -> WeightParams {
        WeightParams::from_f64(alpha, a, prec()).unwrap()
    }

    fn frac(num: f64, den: f64) -> Real {
        Real::from_f64(num, prec()) / den
    }

    #[test]
    fn parameter_validation() {
        assert!(WeightParams::from_f64(0.0, 0.2, prec()).is_err());
        assert!(WeightParams::from_f64(-0.5, 0.2, prec()).is_err());
        assert!(WeightParams::from_f64(1.0, 1.0, prec()).is_err());
        assert!(WeightParams::from_f64(1.0, -0.1, prec()).is_err());
        assert!(WeightParams::from_f64(1.0, 0.0, prec()).is_ok());
    }

    #[test]
    fn weight_values() {
        let x = |v: f64| Real::from_f64(v, prec());
        assert!(weight_eval(&x(0.0), &wp(1.0, 0.5)).unwrap().is_zero());
        assert_eq!(weight_eval(&x(0.0), &wp(1.0, 0.0)).unwrap(), 1.0);
        let w = weight_eval(&x(0.8), &wp(1.0, 0.5)).unwrap();
        assert!((w - 0.36).abs() < 1e-15);
        // closed edge
        let edge = weight_eval(&x(0.5), &wp(1.0, 0.5)).unwrap();
        assert_eq!(edge, 0.75);
        assert!(weight_eval(&x(1.5), &wp(1.0, 0.5)).is_err());
    }

    #[test]
    fn closed_form_moments() {
        let tol = prec().eps_scaled(8);
        assert!(moment(1, &wp(1.0, 0.3), prec()).unwrap().is_zero());
        assert!((moment(0, &wp(1.0, 0.0), prec()).unwrap() - frac(4.0, 3.0)).abs() < tol);
        assert!((moment(2, &wp(1.0, 0.0), prec()).unwrap() - frac(4.0, 15.0)).abs() < tol);
        assert!((moment(0, &wp(1.0, 0.5), prec()).unwrap() - frac(5.0, 12.0)).abs() < tol);
    }

    #[test]
    fn upper_tail_branch_matches_antiderivative() {
        // a^2 = 0.81 lies past the continued-fraction crossover for k = 0.
        // 2 ∫_a^1 (1 - x^2) dx = 2 (2/3 - a + a^3/3)
        let w = wp(1.0, 0.9);
        let m = moment(0, &w, prec()).unwrap();
        let exact = (frac(2.0, 3.0) - w.a() + w.a().powi(3) / 3.0).mul_pow2(1);
        assert!((m - exact).abs() < 1e-70);
    }

    #[test]
    fn legendre_pair_integrates_x_squared() {
        let rule =
            complement_rule_with_exponent(&Real::zero(prec()), &Real::zero(prec()), 8, prec())
                .unwrap();
        let v = rule.integrate(|x| x.square());
        assert!((v - frac(2.0, 3.0)).abs() < prec().eps_scaled(8));
    }

    #[test]
    fn rule_mass_matches_beta_moment() {
        let w = wp(1.0, 0.5);
        let rule = complement_rule(&w, 32, prec()).unwrap();
        let mass = rule.integrate(|_| Real::one(prec()));
        assert!((mass - moment(0, &w, prec()).unwrap()).abs() < 1e-60);
        assert!(rule.right.nodes.iter().all(|x| *x > 0.5 && *x < 1.0));
        assert!(rule.left.nodes.iter().all(|x| *x < -0.5 && *x > -1.0));
    }

    #[test]
    fn odd_moments_vanish_on_symmetric_rule() {
        let w = wp(2.5, 0.35);
        let rule = complement_rule(&w, 24, prec()).unwrap();
        for k in [1, 3, 7] {
            let v = rule.integrate(|x| x.powi(k));
            assert!(v.abs() < prec().eps_scaled(8));
        }
    }

    #[test]
    fn moment_decreases_with_gap() {
        let mut last = moment(0, &wp(0.5, 0.0), prec()).unwrap();
        for i in 1..10 {
            let m = moment(0, &wp(0.5, i as f64 / 10.0), prec()).unwrap();
            assert!(m < last);
            last = m;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn beta_moments_agree_with_quadrature(
            alpha in 0.1f64..3.0,
            a in 0.0f64..0.9,
            j in 0usize..40,
        ) {
            let w = wp(alpha, a);
            // degree 2j + smooth (1+x)^α factor: generous node count
            let rule = complement_rule(&w, 2 * j + 120, prec()).unwrap();
            let quad = rule.integrate(|x| x.powi(2 * j as i32));
            let exact = moment(2 * j, &w, prec()).unwrap();
            let rel = ((quad - &exact) / &exact).abs();
            prop_assert!(rel < prec().eps_scaled(16), "rel err {:?}", rel);
        }

        #[test]
        fn weight_is_even(x in -1.0f64..1.0, a in 0.0f64..0.99, alpha in 0.1f64..4.0) {
            let w = wp(alpha, a);
            let xp = Real::from_f64(x, prec());
            prop_assert_eq!(weight_eval(&xp, &w).unwrap(), weight_eval(&-&xp, &w).unwrap());
        }
    }
}
