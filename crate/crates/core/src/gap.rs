//! Probability that `(-a, a)` holds no eigenvalue, the log-derivative
//! quantity `H_n(a) = a(1 - a^2) Σ_{j<n} R_j(a)`, the relations that tie
//! `H_n` to `r_n` and `β_n`, and a Monte Carlo estimate of the probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::TableFamily;
use crate::error::{Error, Result};
use crate::ladder::ladder_state;
use crate::numerics::{small_det, Precision, Real};
use crate::orthopoly::{build_table, RecurrenceTable};
use crate::report::{normalized_residual, ResidualReport};
use crate::weight::{moment, WeightParams};

/// Largest size accepted by the moment-determinant cross-check.
pub const MAX_HANKEL_SIZE: usize = 12;

#[derive(Debug, Clone)]
pub struct GapResult {
    pub n: usize,
    pub a: Real,
    pub prob: Real,
    pub log_prob: Real,
    /// `H_n(a)`
    pub h_quantity: Real,
    /// `d/da ln P(a, n)`
    pub log_derivative: Real,
}

/// `Σ_{j<n} R_j(a)` from one table.
pub fn edge_sum(table: &RecurrenceTable, n: usize) -> Result<Real> {
    let mut acc = Real::zero(table.precision());
    for j in 0..n {
        acc += ladder_state(table, j)?.big_r;
    }
    Ok(acc)
}

/// `H_n(a) = a(1 - a^2) Σ_{j<n} R_j(a)`.
pub fn h_quantity(table: &RecurrenceTable, n: usize) -> Result<Real> {
    let a = table.a();
    Ok(a * (1.0 - a.square()) * edge_sum(table, n)?)
}

fn log_norm_sum(table: &RecurrenceTable, n: usize) -> Real {
    table.norms()[..n].iter().map(Real::ln).sum()
}

/// Gap probability from norm ratios, `ln P = Σ ln h_j(a) - Σ ln h_j(0)`.
pub fn gap_probability(wp: &WeightParams, n: usize, prec: Precision) -> Result<GapResult> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let gapped = build_table(wp, n, prec)?;
    let log_prob = if wp.a().is_zero() {
        Real::zero(prec)
    } else {
        let full = build_table(&wp.without_gap(), n, prec)?;
        log_norm_sum(&gapped, n) - log_norm_sum(&full, n)
    };
    gap_result(&gapped, n, log_prob)
}

/// Same as [`gap_probability`] with the ungapped table supplied by the caller.
pub fn gap_probability_with(
    gapped: &RecurrenceTable,
    full: &RecurrenceTable,
    n: usize,
) -> Result<GapResult> {
    if n == 0 || n > gapped.n_max() || n > full.n_max() {
        return Err(Error::InvalidParameter(format!(
            "n = {n} outside table range"
        )));
    }
    let log_prob = log_norm_sum(gapped, n) - log_norm_sum(full, n);
    gap_result(gapped, n, log_prob)
}

fn gap_result(gapped: &RecurrenceTable, n: usize, log_prob: Real) -> Result<GapResult> {
    let a = gapped.a().clone();
    let sum = edge_sum(gapped, n)?;
    let h = &a * (1.0 - a.square()) * &sum;
    Ok(GapResult {
        n,
        a,
        prob: log_prob.exp(),
        log_prob,
        h_quantity: h,
        log_derivative: -sum,
    })
}

/// `det(μ_{i+j}(a)) / det(μ_{i+j}(0))` for `i, j < n`.
pub fn hankel_gap_probability(wp: &WeightParams, n: usize, prec: Precision) -> Result<Real> {
    if n == 0 || n > MAX_HANKEL_SIZE {
        return Err(Error::InvalidParameter(format!(
            "Hankel route supports 1 <= n <= {MAX_HANKEL_SIZE}, got {n}"
        )));
    }
    let hankel = |w: &WeightParams| -> Result<Real> {
        let mu = (0..2 * n - 1)
            .map(|k| moment(k, w, prec))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Vec<Real>> = (0..n).map(|i| mu[i..i + n].to_vec()).collect();
        small_det(&rows)
    };
    Ok(hankel(wp)? / hankel(&wp.without_gap())?)
}

/// Residuals of the relations between `H_n` and `r_n, β_n`, plus the value
/// of the denominator `D` in `r_n = N / D`.
#[derive(Debug, Clone)]
pub struct HnOdeReport {
    pub n: usize,
    pub a: Real,
    pub residuals: ResidualReport,
    /// `|r_n - N/D|`
    pub r_reconstruction: f64,
    pub denominator: Real,
}

/// Entries of [`HnOdeReport::residuals`], in reporting order.
pub const H_RESIDUALS: &[&str] = &[
    "h_edge_relation",
    "h_beta_relation",
    "r_derivative_squared",
    "r_derivative_cubic",
    "h_ode",
    "r_reconstruction",
];

/// Values an `H_n` relation consumes.
#[derive(Debug, Clone)]
pub struct HJet {
    pub n: usize,
    pub a: Real,
    pub alpha: Real,
    pub h: Real,
    pub h_p: Real,
    pub h_pp: Real,
}

impl HJet {
    pub fn from_family(family: &TableFamily, n: usize) -> Result<Self> {
        if n == 0 || n > family.n_max() {
            return Err(Error::InvalidParameter(format!(
                "n = {n} outside table range"
            )));
        }
        let f = |t: &RecurrenceTable| h_quantity(t, n);
        Ok(Self {
            n,
            a: family.a().clone(),
            alpha: family.center().alpha().clone(),
            h: f(family.center())?,
            h_p: family.derivative(1, f)?,
            h_pp: family.derivative(2, f)?,
        })
    }

    fn n_alpha(&self) -> Real {
        &self.alpha + self.n as f64
    }

    /// `n^2 + 2nα`
    fn n_sq_2na(&self) -> Real {
        let nf = self.n as f64;
        nf * (self.alpha.mul_pow2(1) + nf)
    }

    /// `a^2 n^2 + 2α a^2 n + 1`
    fn edge_poly(&self) -> Real {
        self.a.square() * self.n_sq_2na() + 1.0
    }

    /// Numerator `N` of `r_n = N / D`.
    pub fn numerator(&self) -> Real {
        let (a, al, nf) = (&self.a, &self.alpha, self.n as f64);
        let (h, h1, h2) = (&self.h, &self.h_p, &self.h_pp);
        let a2 = a.square();
        let a2m1 = &a2 - 1.0;
        let a4 = a2.square();
        let na = self.n_alpha();
        let n_2a = self.n_sq_2na();
        let al2 = al.square();
        let n2 = nf * nf;
        let ep = self.edge_poly();
        let mut terms = Vec::with_capacity(9);
        terms.push(&a2 * a2m1.powi(3) * h2.square());
        terms.push((&a2 * a2m1.square() * (h - a * h1) * h2).mul_pow2(2));
        terms.push((a * a2m1.square() * h1.powi(3)).mul_pow2(2));
        terms.push(
            -(&a2m1
                * ((5.0 * &a2 - 1.0) * h + (&na - 1.0) * (&na + 1.0) * &a4
                    - (&n_2a * &a2).mul_pow2(2))
                * h1.square())
            .mul_pow2(2),
        );
        let lin = (a * &a2m1 * h.square()).mul_pow2(5)
            + ((a * &a4 * (2.0 * &al2 + 2.0 * n2 + 4.0 * al * nf - 1.0)).mul_pow2(3)
                - (a * &a2 * (4.0 * n2 + 8.0 * al * nf - 1.0)).mul_pow2(3)
                + (a * &n_2a).mul_pow2(5))
                * h
            - (a * &a2 * na.square() * &ep).mul_pow2(4);
        terms.push(lin * h1);
        terms.push(-(&a2m1 * h.powi(3)).mul_pow2(4));
        terms.push(
            -(((&a4 * (4.0 * &al2 + 4.0 * n2 + 8.0 * al * nf - 1.0)).mul_pow2(2)
                - (&a2 * (4.0 * n2 + 8.0 * al * nf - 1.0)).mul_pow2(2)
                + n_2a.mul_pow2(4))
                * h.square()),
        );
        terms.push((&a2 * na.square() * &ep * h).mul_pow2(4));
        terms.into_iter().sum()
    }

    /// Denominator `D` of `r_n = N / D`.
    pub fn denominator(&self) -> Real {
        self.denominator_bracket() * self.n_alpha().mul_pow2(3)
    }

    /// `D / (8(n + α))`.
    fn denominator_bracket(&self) -> Real {
        let (a, al) = (&self.a, &self.alpha);
        let (h, h1, h2) = (&self.h, &self.h_p, &self.h_pp);
        let a2 = a.square();
        let a2m1 = &a2 - 1.0;
        let na = self.n_alpha();
        let n_2a = self.n_sq_2na();
        a2m1.square() * &a2 * h2
            - (a * &a2m1 * (&a2 * (n_2a.mul_pow2(1) + 1.0) - h.mul_pow2(1)) * h1).mul_pow2(1)
            - (&a2m1 * h.square()).mul_pow2(2)
            - (&a2 * ((2.0 * al.square() - 1.0) * &a2 + n_2a.mul_pow2(1) + 1.0) * h).mul_pow2(1)
            + (a2.square() * na.square() * self.edge_poly()).mul_pow2(2)
    }

    /// Both sides of the second-order equation for `H_n`.
    pub fn ode_sides(&self) -> (Real, Real) {
        let (a, al, nf) = (&self.a, &self.alpha, self.n as f64);
        let (h, h1, h2) = (&self.h, &self.h_p, &self.h_pp);
        let a2 = a.square();
        let a2m1 = &a2 - 1.0;
        let a4 = a2.square();
        let na = self.n_alpha();
        let n_2a = self.n_sq_2na();
        let al2 = al.square();
        let n2 = nf * nf;
        let ep = self.edge_poly();
        let inner = [
            &a2 * a2m1.powi(4) * h2.square(),
            -(&a2
                * a2m1.square()
                * ((&a2 * a - a) * h1 - &a2m1 * h - (&a2 * na.square()).mul_pow2(1))
                * h2)
                .mul_pow2(2),
            (a * a2m1.powi(3) * h1.powi(3)).mul_pow2(2),
            -(a2m1.square()
                * (&a4 * (&na - 1.0) * (&na + 1.0) - (&a2 * &n_2a).mul_pow2(2)
                    + (5.0 * &a2 - 1.0) * h)
                * h1.square())
            .mul_pow2(2),
            (a * &a2m1
                * ((&a2m1 * h.square()).mul_pow2(2)
                    + (&a4 * (2.0 * &al2 + 2.0 * n2 + 4.0 * al * nf - 1.0)
                        + &a2 * (4.0 * &al2 + 1.0)
                        + n_2a.mul_pow2(2))
                        * h
                    - (&a2 * na.square() * (3.0 * &a2 * &n_2a + &a2 + 1.0)).mul_pow2(1))
                * h1)
                .mul_pow2(3),
            -(a2m1.square() * h.powi(3)).mul_pow2(4),
            -(&a2m1
                * (&a4 * (4.0 * &al2 + 4.0 * n2 + 8.0 * al * nf - 1.0)
                    + &a2 * (8.0 * &al2 + 4.0 * n2 + 8.0 * al * nf + 1.0)
                    + n_2a.mul_pow2(2))
                * h.square())
            .mul_pow2(2),
            -(&a2
                * na.square()
                * (&a4 * (2.0 * &al2 - n2 - 2.0 * al * nf - 1.0) + 3.0 * &a2 * &n_2a + 1.0)
                * h)
                .mul_pow2(4),
            (&a4 * &a2 * na.powi(4) * &ep).mul_pow2(5),
        ];
        let lhs: Real = inner.into_iter().sum::<Real>().square();
        let rhs = (na.square() * (&a4 * na.square() + &a2m1 * (h - a * h1))).mul_pow2(6)
            * self.denominator_bracket().square();
        (lhs, rhs)
    }

    fn linear_relation_terms(&self, r: &Real) -> Vec<Real> {
        let a = &self.a;
        vec![
            a * &self.h_p,
            -&self.h,
            -((1.0 - a.square()) * r.square()),
            (self.n_alpha() * a.square() * r).mul_pow2(1),
        ]
    }
}

/// Relations between `H_n(a)` and the ladder data, with finite-difference
/// derivatives of `H_n` over the family grid.
pub fn hn_ode_report(family: &TableFamily, n: usize) -> Result<HnOdeReport> {
    if n + 1 > family.n_max() {
        return Err(Error::InvalidParameter(format!(
            "n = {n} needs tables up to n + 1"
        )));
    }
    let jet = HJet::from_family(family, n)?;
    let center = family.center();
    let prec = center.precision();
    let a = jet.a.clone();
    let r = ladder_state(center, n)?.r;
    let r_p = family.derivative(1, |t| Ok(ladder_state(t, n)?.r))?;
    let beta = center.beta(n);
    let na = jet.n_alpha();
    let one_m_a2 = 1.0 - a.square();
    let k_plus = na.mul_pow2(1) + 1.0;

    let mut residuals = ResidualReport::new();
    residuals.insert(
        "h_edge_relation",
        normalized_residual(&jet.linear_relation_terms(&r)),
    );
    residuals.insert(
        "h_beta_relation",
        normalized_residual(&[
            &k_plus * (&k_plus - 2.0) * beta,
            jet.h.clone(),
            -(&na * &one_m_a2 * &r).mul_pow2(1),
            -jet.n_sq_2na(),
        ]),
    );
    let x = &a * &jet.h_pp + (&a * r.square()).mul_pow2(1) + (&a * &na * &r).mul_pow2(2);
    let q = &one_m_a2 * (&a * &jet.h_p - &jet.h) + na.square() * a.square().square();
    residuals.insert(
        "r_derivative_squared",
        normalized_residual(&[(r_p.square() * &q).mul_pow2(2), -x.square()]),
    );
    let a2m1 = a.square() - 1.0;
    residuals.insert(
        "r_derivative_cubic",
        normalized_residual(&[
            a2m1.square() * r_p.square(),
            -(&a2m1 * &na * r.powi(3)).mul_pow2(3),
            -(((4.0 * a.square() - 1.0) * na.square() + jet.alpha.square() + &jet.h) * r.square())
                .mul_pow2(2),
            -(&a * &na * &jet.h_p * &r).mul_pow2(3),
            -jet.h_p.square(),
        ]),
    );
    let (lhs, rhs) = jet.ode_sides();
    residuals.insert("h_ode", normalized_residual(&[lhs, -rhs]));

    let den = jet.denominator();
    let num = jet.numerator();
    let scale = num.abs().max_ref(&den.abs()).clone();
    if den.abs() <= &scale * prec.eps_scaled(prec.bits() as i32 / 2) || den.is_zero() {
        return Err(Error::ZeroDenominator { n, a: a.to_f64() });
    }
    let r_reconstruction = (&r - num / &den).abs().to_f64();
    residuals.insert("r_reconstruction", r_reconstruction);
    Ok(HnOdeReport {
        n,
        a,
        residuals,
        r_reconstruction,
        denominator: den,
    })
}

/// Monte Carlo estimate with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

pub const MC_MAX_N: usize = 4;
pub const MC_MIN_SAMPLES: u64 = 10_000;
const MC_CHUNK: u64 = 1 << 14;

#[derive(Default, Clone, Copy)]
struct Moments {
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        Moments {
            sx: self.sx + o.sx,
            sy: self.sy + o.sy,
            sxx: self.sxx + o.sxx,
            syy: self.syy + o.syy,
        }
    }
}

/// Uniform points on `[-1, 1]^n` weighted by `Π_{i<j} (x_i - x_j)^2 Π (1 - x_i^2)^α`;
/// the probability is the weighted fraction with every `|x_i| >= a`.
/// Chunk `k` draws from stream `k` of a ChaCha generator keyed by `seed`, and
/// chunk sums are combined in chunk order, so results do not depend on the
/// thread count.
pub fn mc_gap_probability(
    wp: &WeightParams,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n == 0 || n > MC_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "Monte Carlo supports 1 <= n <= {MC_MAX_N}, got {n}"
        )));
    }
    if samples < MC_MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MC_MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let alpha = wp.alpha().to_f64();
    let a = wp.a().to_f64();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let count = MC_CHUNK.min(samples - k * MC_CHUNK);
            let mut m = Moments::default();
            let mut x = [0.0f64; MC_MAX_N];
            for _ in 0..count {
                let mut f = 1.0;
                let mut inside = true;
                for i in 0..n {
                    let xi: f64 = rng.random_range(-1.0..1.0);
                    x[i] = xi;
                    f *= (1.0 - xi * xi).powf(alpha);
                    inside &= xi.abs() >= a;
                    for xj in &x[..i] {
                        let d = xi - xj;
                        f *= d * d;
                    }
                }
                m.sx += f;
                m.sxx += f * f;
                if inside {
                    m.sy += f;
                    m.syy += f * f;
                }
            }
            m
        })
        .collect();
    let m = partial.into_iter().fold(Moments::default(), Moments::merge);
    let count = samples as f64;
    let (mx, my) = (m.sx / count, m.sy / count);
    let ratio = my / mx;
    // y = x on the accepted set, so cov(x, y) uses Σ y^2
    let var_x = m.sxx / count - mx * mx;
    let var_y = m.syy / count - my * my;
    let cov = m.syy / count - mx * my;
    let var = (var_y - 2.0 * ratio * cov + ratio * ratio * var_x) / (mx * mx * count);
    Ok(MonteCarloEstimate {
        estimate: ratio,
        stderr: var.max(0.0).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TableFamily;
    use proptest::prelude::*;

    fn prec() -> Precision {
        Precision::default()
    }

    #[test]
    fn no_gap_means_certainty() {
        let wp = WeightParams::from_f64(1.0, 0.0, prec()).unwrap();
        let g = gap_probability(&wp, 5, prec()).unwrap();
        assert_eq!(g.prob, 1.0);
        assert!(g.h_quantity.is_zero());
    }

    #[test]
    fn single_level_closed_form() {
        let wp = WeightParams::from_f64(1.0, 0.5, prec()).unwrap();
        let g = gap_probability(&wp, 1, prec()).unwrap();
        let expected = Real::from_f64(5.0, prec()) / 16.0;
        assert!((g.prob - expected).abs() < prec().eps_scaled(8));
    }

    #[test]
    fn hankel_route_matches_norm_product() {
        let wp = WeightParams::from_f64(1.0, 0.1, prec()).unwrap();
        let g = gap_probability(&wp, 3, prec()).unwrap();
        let hk = hankel_gap_probability(&wp, 3, prec()).unwrap();
        assert!(((&g.prob - hk) / &g.prob).abs() < 1e-50);
    }

    #[test]
    fn probability_decreases_with_gap() {
        let mut last = Real::one(prec());
        for a in [0.05, 0.1, 0.2, 0.4, 0.6] {
            let wp = WeightParams::from_f64(1.0, a, prec()).unwrap();
            let p = gap_probability(&wp, 4, prec()).unwrap().prob;
            assert!(p < last && p > 0.0);
            last = p;
        }
    }

    #[test]
    fn two_routes_to_h() {
        let wp = WeightParams::from_f64(1.5, 0.35, prec()).unwrap();
        let fam = TableFamily::build(&wp, 6, prec()).unwrap();
        let g = gap_probability_with(
            fam.center(),
            &build_table(&wp.without_gap(), 6, prec()).unwrap(),
            6,
        )
        .unwrap();
        let fd = fam.derivative(1, |t| Ok(log_norm_sum(t, 6))).unwrap();
        let a = wp.a();
        let scale = a * (a.square() - 1.0);
        let via_log_derivative = &scale * &g.log_derivative;
        assert!(
            ((via_log_derivative - &g.h_quantity) / &g.h_quantity).abs() < prec().eps_scaled(40)
        );
        // differencing ln P loses about bits/4 to the step
        let via_fd = scale * fd;
        assert!(((via_fd - &g.h_quantity) / &g.h_quantity).abs() < 1e-50);
    }

    #[test]
    fn h_relations() {
        let p = Precision::new(512).unwrap();
        let wp = WeightParams::from_f64(1.0, 0.2, p).unwrap();
        let fam = TableFamily::build_with_step(&wp, 9, p.pow2(-80), p).unwrap();
        let report = hn_ode_report(&fam, 8).unwrap();
        let res = &report.residuals;
        assert!(res.get("h_edge_relation").unwrap() < 1e-20);
        assert!(res.get("h_beta_relation").unwrap() < 1e-30);
        assert!(report.r_reconstruction < 1e-12);
        assert!(res.get("h_ode").unwrap() < 1e-10);
        assert!(res.get("r_derivative_squared").unwrap() < 1e-12);
        assert!(res.get("r_derivative_cubic").unwrap() < 1e-12);
    }

    #[test]
    fn edge_relation_collapses_without_gap() {
        let wp = WeightParams::from_f64(1.0, 0.0, prec()).unwrap();
        let t = build_table(&wp, 6, prec()).unwrap();
        let jet = HJet {
            n: 5,
            a: Real::zero(prec()),
            alpha: t.alpha().clone(),
            h: h_quantity(&t, 5).unwrap(),
            h_p: Real::one(prec()),
            h_pp: Real::zero(prec()),
        };
        let r = ladder_state(&t, 5).unwrap().r;
        assert!(r.is_zero() && jet.h.is_zero());
        assert_eq!(normalized_residual(&jet.linear_relation_terms(&r)), 0.0);
    }

    /// Coefficients `(c0, c1)` of the linear equation in `r` left after
    /// squaring the two expressions for `r_n'` against each other and
    /// reducing modulo the quadratic edge relation.
    fn reduced_linear_coefficients(j: &HJet) -> (Real, Real) {
        let prec = j.a.precision();
        let a = &j.a;
        let na = j.n_alpha();
        let zero = || Real::zero(prec);
        let mul = |p: &[Real], q: &[Real]| -> Vec<Real> {
            let mut out = vec![zero(); p.len() + q.len() - 1];
            for (i, x) in p.iter().enumerate() {
                for (k, y) in q.iter().enumerate() {
                    out[i + k] += x * y;
                }
            }
            out
        };
        let a2m1 = a.square() - 1.0;
        // X(r) = a H'' + 4a(n+α) r + 2a r^2
        let x = vec![a * &j.h_pp, (a * &na).mul_pow2(2), a.mul_pow2(1)];
        let q = (1.0 - a.square()) * (a * &j.h_p - &j.h) + na.square() * a.square().square();
        let r5 = vec![
            j.h_p.square(),
            (a * &na * &j.h_p).mul_pow2(3),
            (((4.0 * a.square() - 1.0) * na.square()) + j.alpha.square() + &j.h).mul_pow2(2),
            (&a2m1 * &na).mul_pow2(3),
        ];
        let lhs: Vec<Real> = mul(&x, &x).into_iter().map(|c| a2m1.square() * c).collect();
        let rhs: Vec<Real> = r5.into_iter().map(|c| (&q * c).mul_pow2(2)).collect();
        let mut poly: Vec<Real> = lhs
            .iter()
            .enumerate()
            .map(|(i, c)| c - rhs.get(i).cloned().unwrap_or_else(zero))
            .collect();
        // r^2 = (aH' - H + 2(n+α)a^2 r) / (1 - a^2)
        let g = 1.0 - a.square();
        let e = (a * &j.h_p - &j.h) / &g;
        let f = (&na * a.square()).mul_pow2(1) / &g;
        while poly.len() > 2 {
            let top = poly.pop().unwrap();
            let k = poly.len();
            poly[k - 1] += &top * &f;
            poly[k - 2] += &top * &e;
        }
        (poly[0].clone(), poly[1].clone())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn numerator_denominator_transcription(
            a in 0.05f64..0.9,
            alpha in 0.2f64..3.0,
            n in 1usize..40,
            h in -5.0f64..5.0,
            h_p in -5.0f64..5.0,
            h_pp in -5.0f64..5.0,
        ) {
            let p = prec();
            let jet = HJet {
                n,
                a: Real::from_f64(a, p),
                alpha: Real::from_f64(alpha, p),
                h: Real::from_f64(h, p),
                h_p: Real::from_f64(h_p, p),
                h_pp: Real::from_f64(h_pp, p),
            };
            let (c0, c1) = reduced_linear_coefficients(&jet);
            let num = jet.numerator();
            let den = jet.denominator();
            let res = normalized_residual(&[&num * &c1, &den * &c0]);
            prop_assert!(res < 1e-60, "residual {res:e}");
        }
    }

    #[test]
    fn monte_carlo_single_level() {
        let wp = WeightParams::from_f64(1.0, 0.5, prec()).unwrap();
        let est = mc_gap_probability(&wp, 1, 200_000, 7).unwrap();
        assert!((est.estimate - 0.3125).abs() < 4.0 * est.stderr);
        assert!(est.stderr < 3e-3);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let wp = WeightParams::from_f64(1.0, 0.3, prec()).unwrap();
        let x = mc_gap_probability(&wp, 2, 50_000, 42).unwrap();
        let y = mc_gap_probability(&wp, 2, 50_000, 42).unwrap();
        assert_eq!(x.estimate.to_bits(), y.estimate.to_bits());
        assert_eq!(x.stderr.to_bits(), y.stderr.to_bits());
        let z = mc_gap_probability(&wp, 2, 50_000, 43).unwrap();
        assert_ne!(x.estimate.to_bits(), z.estimate.to_bits());
    }

    #[test]
    fn monte_carlo_rejects_bad_input() {
        let wp = WeightParams::from_f64(1.0, 0.3, prec()).unwrap();
        assert!(mc_gap_probability(&wp, 5, 100_000, 1).is_err());
        assert!(mc_gap_probability(&wp, 2, 100, 1).is_err());
    }
}
