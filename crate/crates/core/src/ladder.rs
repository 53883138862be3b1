//! Auxiliary quantities of the lowering relation
//! `P_n'(z) = β_n A_n(z) P_{n-1}(z) - B_n(z) P_n(z)` and the finite-n
//! identities between them, evaluated as normalized numerical residuals.
//!
//! With `w_a = (1 - a^2)^α`:
//!
//! * `R_n = 2 P_n(a)^2 w_a / h_n`, `r_n = 2 P_n(a) P_{n-1}(a) w_a / h_{n-1}`
//! * `R̃_n = -(a R_n + 2n + 2α + 1)`, `r̃_n = -(r_n + n)`
//! * `A_n(z) = a R_n / (z^2 - a^2) + R̃_n / (z^2 - 1)`
//! * `B_n(z) = z r_n / (z^2 - a^2) + z r̃_n / (z^2 - 1)`

use crate::error::{Error, Result};
use crate::numerics::{default_step, fd_derivative_complex, Complex, Precision, Real};
use crate::orthopoly::{eval_monic, eval_monic_complex, RecurrenceTable};
use crate::report::{normalized_residual, normalized_residual_complex, ResidualReport};
use crate::weight::complement_rule_with_exponent;

/// Minimum distance between a sample point and the poles `±a, ±1`.
pub const MIN_POLE_DISTANCE: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct LadderState {
    pub n: usize,
    pub a: Real,
    pub big_r: Real,
    pub r: Real,
    pub big_r_tilde: Real,
    pub r_tilde: Real,
}

#[derive(Debug, Clone)]
pub struct LadderCoeffs {
    pub z: Complex,
    pub a_coef: Complex,
    pub b_coef: Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TildeMode {
    /// `R̃_n`, `r̃_n` from their closed forms in `R_n`, `r_n`.
    ClosedForm,
    /// `R̃_n`, `r̃_n` from direct quadrature of their integral definitions.
    Quadrature,
}

fn validate_index(table: &RecurrenceTable, n: usize) -> Result<()> {
    if n > table.n_max() {
        return Err(Error::InvalidParameter(format!(
            "ladder index {n} exceeds table size {}",
            table.n_max()
        )));
    }
    Ok(())
}

/// `(R_n, r_n)` from the polynomial values at the gap edge.
fn edge_quantities(table: &RecurrenceTable, n: usize) -> Result<(Real, Real)> {
    let a = table.a();
    let w_edge = table.weight().edge_value();
    let ev = eval_monic(table, n, a)?;
    let big_r = ev.value.square() * &w_edge / table.h(n);
    let big_r = big_r.mul_pow2(1);
    if big_r.is_sign_negative() || !big_r.is_finite() {
        return Err(Error::LostPositivity {
            n,
            required_bits: table.precision().bits() * 2,
        });
    }
    let r = if n == 0 {
        Real::zero(table.precision())
    } else {
        (&ev.value * &ev.value_prev * &w_edge / table.h(n - 1)).mul_pow2(1)
    };
    Ok((big_r, r))
}

pub fn ladder_state(table: &RecurrenceTable, n: usize) -> Result<LadderState> {
    validate_index(table, n)?;
    let (big_r, r) = edge_quantities(table, n)?;
    let a = table.a().clone();
    let two_n_alpha = table.alpha().mul_pow2(1) + 2.0 * n as f64;
    let big_r_tilde = -(&a * &big_r + two_n_alpha + 1.0);
    let r_tilde = -(&r + n as f64);
    Ok(LadderState {
        n,
        a,
        big_r,
        r,
        big_r_tilde,
        r_tilde,
    })
}

/// `(R̃_j, r̃_j)` for `j = 0..=n_hi` from the integrals
/// `R̃_j = (2α/h_j) ∫ P_j^2 w / (x^2 - 1)` and
/// `r̃_j = (2α/h_{j-1}) ∫ x P_j P_{j-1} w / (x^2 - 1)`,
/// integrated against `(1 - x^2)^(α-1)` on the gapped support.
pub fn tilde_by_quadrature(table: &RecurrenceTable, n_hi: usize) -> Result<Vec<(Real, Real)>> {
    validate_index(table, n_hi)?;
    let prec = table.precision();
    let exponent = table.alpha() - 1.0;
    let m = table.nodes_per_interval();
    let rule = complement_rule_with_exponent(&exponent, table.a(), m, prec)?;
    let xs = &rule.right.nodes;
    let ws = &rule.right.weights;
    let two_alpha = table.alpha().mul_pow2(1);

    let mut prev: Vec<Real> = vec![Real::zero(prec); xs.len()];
    let mut cur: Vec<Real> = vec![Real::one(prec); xs.len()];
    let mut out = Vec::with_capacity(n_hi + 1);
    for j in 0..=n_hi {
        if j > 0 {
            let b = table.beta(j - 1);
            let next: Vec<Real> = xs
                .iter()
                .zip(cur.iter().zip(&prev))
                .map(|(x, (c, p))| x * c - b * p)
                .collect();
            prev = std::mem::replace(&mut cur, next);
        }
        let mut sq = Real::zero(prec);
        let mut cross = Real::zero(prec);
        for ((x, w), (c, p)) in xs.iter().zip(ws).zip(cur.iter().zip(&prev)) {
            sq += c.square() * w;
            cross += x * c * p * w;
        }
        // both integrands are even: double the right half; x^2 - 1 = -(1 - x^2)
        let big_r_tilde = -(&two_alpha * sq.mul_pow2(1) / table.h(j));
        let r_tilde = if j == 0 {
            Real::zero(prec)
        } else {
            -(&two_alpha * cross.mul_pow2(1) / table.h(j - 1))
        };
        out.push((big_r_tilde, r_tilde));
    }
    Ok(out)
}

pub fn ladder_state_with(
    table: &RecurrenceTable,
    n: usize,
    mode: TildeMode,
) -> Result<LadderState> {
    let mut state = ladder_state(table, n)?;
    if mode == TildeMode::Quadrature {
        let (bt, rt) = tilde_by_quadrature(table, n)?.swap_remove(n);
        state.big_r_tilde = bt;
        state.r_tilde = rt;
    }
    Ok(state)
}

/// States for every `j` in `0..=n_hi` (closed-form tildes).
pub fn ladder_states(table: &RecurrenceTable, n_hi: usize) -> Result<Vec<LadderState>> {
    (0..=n_hi).map(|j| ladder_state(table, j)).collect()
}

pub fn ladder_coeffs(state: &LadderState, z: &Complex) -> LadderCoeffs {
    let z2 = z * z;
    let to_gap = (&z2 - &state.a.square()).recip();
    let to_end = (&z2 - 1.0).recip();
    let a_coef = to_gap.scale(&(&state.a * &state.big_r)) + to_end.scale(&state.big_r_tilde);
    let b_coef = z * &(to_gap.scale(&state.r) + to_end.scale(&state.r_tilde));
    LadderCoeffs {
        z: z.clone(),
        a_coef,
        b_coef,
    }
}

/// Real, imaginary and off-axis points, all away from `±a` and `±1`.
pub fn default_z_samples(prec: Precision) -> Vec<Complex> {
    [(0.7, 0.0), (0.0, 0.9), (0.5, 0.5), (2.0, 0.0), (0.0, 1.5)]
        .iter()
        .map(|&(re, im)| Complex::from_f64(re, im, prec))
        .collect()
}

fn check_pole_distance(z: &Complex, a: &Real) -> Result<()> {
    let prec = z.precision();
    let poles = [a.clone(), -a, Real::one(prec), Real::from_f64(-1.0, prec)];
    for p in &poles {
        let d = (z - &Complex::from_real(p.clone())).abs().to_f64();
        if d < MIN_POLE_DISTANCE {
            return Err(Error::PoleProximity {
                z: format!("{z:?}"),
                distance: d,
                min_distance: MIN_POLE_DISTANCE,
            });
        }
    }
    Ok(())
}

/// Residual names produced by [`identity_residuals`]; entries evaluated at
/// sample points carry a `[k]` suffix.
pub const SCALAR_IDENTITIES: &[&str] = &[
    "edge_r_sum",
    "endpoint_tilde_sum",
    "edge_beta_r_step",
    "endpoint_beta_r_step",
    "r_squared_product",
    "endpoint_double_pole",
    "quadratic_r_relation",
    "edge_residue_with_sum",
    "linear_sum_rule",
    "subleading_coefficient",
    "tilde_big_r_quadrature",
    "tilde_r_quadrature",
];

pub const SAMPLED_IDENTITIES: &[&str] = &["compat_s1", "compat_s2", "compat_s2_sum", "lowering"];

/// Every finite-n identity tying `A_n, B_n, R_n, r_n, β_n, p(n, a)` together,
/// as residuals normalized by the largest summand. Needs `1 <= n` and
/// `n + 2 <= n_max`.
pub fn identity_residuals(
    table: &RecurrenceTable,
    n: usize,
    z_samples: &[Complex],
) -> Result<ResidualReport> {
    if n == 0 || n + 2 > table.n_max() {
        return Err(Error::InvalidParameter(format!(
            "identity checks need 1 <= n <= n_max - 2, got n = {n} with n_max = {}",
            table.n_max()
        )));
    }
    let a = table.a().clone();
    for z in z_samples {
        check_pole_distance(z, &a)?;
    }
    let prec = table.precision();
    let alpha = table.alpha();
    let states = ladder_states(table, n + 1)?;
    let quad = tilde_by_quadrature(table, n + 1)?;
    let mut report = ResidualReport::new();

    let nf = n as f64;
    let s = &states[n];
    let s_next = &states[n + 1];
    let s_prev = &states[n - 1];
    let beta = table.beta(n);
    let beta_next = table.beta(n + 1);
    let na = alpha + nf; // n + α
    let k_plus = na.mul_pow2(1) + 1.0; // 2n + 2α + 1
    let k_minus = na.mul_pow2(1) - 1.0; // 2n + 2α - 1
    let n2_2na = nf * (alpha.mul_pow2(1) + nf); // n^2 + 2nα
    let one_m_a2 = 1.0 - a.square();
    let sum_r: Real = states[..n].iter().map(|st| &st.big_r).sum();
    let r2 = s.r.square();

    report.insert(
        "edge_r_sum",
        normalized_residual(&[s_next.r.clone(), s.r.clone(), -(&a * &s.big_r)]),
    );
    report.insert(
        "endpoint_tilde_sum",
        normalized_residual(&[
            quad[n].0.clone(),
            -&quad[n + 1].1,
            -&quad[n].1,
            alpha.mul_pow2(1),
        ]),
    );
    report.insert(
        "edge_beta_r_step",
        normalized_residual(&[
            &a * &s_next.r,
            -(&a * &s.r),
            -(beta_next * &s_next.big_r),
            beta * &s_prev.big_r,
        ]),
    );
    report.insert(
        "endpoint_beta_r_step",
        normalized_residual(&[
            s_next.r.clone(),
            -&s.r,
            Real::one(prec),
            -(&a * beta_next * &s_next.big_r),
            &a * beta * &s_prev.big_r,
            -((&k_plus + 2.0) * beta_next),
            &k_minus * beta,
        ]),
    );
    report.insert(
        "r_squared_product",
        normalized_residual(&[r2.clone(), -(beta * &s.big_r * &s_prev.big_r)]),
    );
    report.insert(
        "endpoint_double_pole",
        normalized_residual(&[
            r2.clone(),
            na.mul_pow2(1) * &s.r,
            n2_2na.clone(),
            -(beta * (&a * &s.big_r + &k_plus) * (&a * &s_prev.big_r + &k_minus)),
        ]),
    );
    report.insert(
        "quadratic_r_relation",
        normalized_residual(&[
            &one_m_a2 * &r2,
            na.mul_pow2(1) * &s.r,
            n2_2na.clone(),
            -(&k_minus * &a * beta * &s.big_r),
            -(&k_plus * &a * beta * &s_prev.big_r),
            -(&k_plus * &k_minus * beta),
        ]),
    );
    report.insert(
        "edge_residue_with_sum",
        normalized_residual(&[
            &one_m_a2 * &r2,
            na.mul_pow2(1) * a.square() * &s.r,
            &a * &one_m_a2 * &sum_r,
            -(&k_minus * &a * beta * &s.big_r),
            -(&k_plus * &a * beta * &s_prev.big_r),
        ]),
    );
    report.insert(
        "linear_sum_rule",
        normalized_residual(&[
            -(&a * &one_m_a2 * &sum_r),
            na.mul_pow2(1) * &one_m_a2 * &s.r,
            -(&k_plus * &k_minus * beta),
            n2_2na.clone(),
        ]),
    );
    report.insert(
        "subleading_coefficient",
        normalized_residual(&[
            table.p_coef(n).clone(),
            (&one_m_a2 * &s.r).mul_pow2(-1),
            -(&k_plus * beta).mul_pow2(-1),
            Real::from_f64(nf / 2.0, prec),
        ]),
    );
    report.insert(
        "tilde_big_r_quadrature",
        normalized_residual(&[s.big_r_tilde.clone(), -&quad[n].0]),
    );
    report.insert(
        "tilde_r_quadrature",
        normalized_residual(&[s.r_tilde.clone(), -&quad[n].1]),
    );

    let step = default_step(prec);
    for (k, z) in z_samples.iter().enumerate() {
        let v0p = table.weight().potential_derivative(z);
        let c_prev = ladder_coeffs(s_prev, z);
        let c = ladder_coeffs(s, z);
        let c_next = ladder_coeffs(s_next, z);
        let c_nf = Complex::from_f64(1.0, 0.0, prec);

        report.insert(
            format!("compat_s1[{k}]"),
            normalized_residual_complex(&[
                c_next.b_coef.clone(),
                c.b_coef.clone(),
                -(z * &c.a_coef),
                v0p.clone(),
            ]),
        );
        report.insert(
            format!("compat_s2[{k}]"),
            normalized_residual_complex(&[
                c_nf,
                z * &c_next.b_coef,
                -(z * &c.b_coef),
                -c_next.a_coef.scale(beta_next),
                c_prev.a_coef.scale(beta),
            ]),
        );
        let mut sum_a = Complex::from_f64(0.0, 0.0, prec);
        for st in &states[..n] {
            sum_a += ladder_coeffs(st, z).a_coef;
        }
        report.insert(
            format!("compat_s2_sum[{k}]"),
            normalized_residual_complex(&[
                c.b_coef.square(),
                &v0p * &c.b_coef,
                sum_a,
                -(&c.a_coef * &c_prev.a_coef).scale(beta),
            ]),
        );

        let (p_n, p_prev) = eval_monic_complex(table, n, z)?;
        let values: Vec<Complex> = (-2i32..=2)
            .map(|j| {
                let shifted = z + &Complex::from_real(&step * j as f64);
                eval_monic_complex(table, n, &shifted).map(|v| v.0)
            })
            .collect::<Result<_>>()?;
        let dp = fd_derivative_complex(&values, 1, &step)?;
        report.insert(
            format!("lowering[{k}]"),
            normalized_residual_complex(&[
                dp,
                -(&c.a_coef * &p_prev).scale(beta),
                &c.b_coef * &p_n,
            ]),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::build_table;
    use crate::weight::WeightParams;

    fn prec() -> Precision {
        Precision::default()
    }

    fn table(alpha: f64, a: f64, n_max: usize) -> RecurrenceTable {
        build_table(
            &WeightParams::from_f64(alpha, a, prec()).unwrap(),
            n_max,
            prec(),
        )
        .unwrap()
    }

    #[test]
    fn r_vanishes_without_gap() {
        let t = table(1.0, 0.0, 12);
        for n in 1..=12 {
            assert!(ladder_state(&t, n).unwrap().r.is_zero());
        }
    }

    #[test]
    fn tilde_closed_forms_hold_by_construction() {
        let t = table(1.0, 0.3, 8);
        let s = ladder_state(&t, 5).unwrap();
        assert_eq!(s.r_tilde, -(&s.r + 5.0));
        assert!(s.big_r >= 0.0);
    }

    #[test]
    fn tilde_quadrature_matches_closed_form() {
        let t = table(1.0, 0.3, 8);
        let closed = ladder_state(&t, 5).unwrap();
        let quad = ladder_state_with(&t, 5, TildeMode::Quadrature).unwrap();
        let tol = prec().eps_scaled(30);
        assert!((&closed.big_r_tilde - &quad.big_r_tilde).abs() < &tol * closed.big_r_tilde.abs());
        assert!((&closed.r_tilde - &quad.r_tilde).abs() < &tol * closed.r_tilde.abs());
    }

    #[test]
    fn tilde_quadrature_with_singular_endpoint_factor() {
        // α = 1/2: the integrand carries (1 - x^2)^(-1/2)
        let t = table(0.5, 0.2, 10);
        let quad = tilde_by_quadrature(&t, 9).unwrap();
        for (n, (big_r_tilde, _)) in quad.iter().enumerate().skip(1) {
            let closed = ladder_state(&t, n).unwrap();
            let rel = ((&closed.big_r_tilde - big_r_tilde) / &closed.big_r_tilde).abs();
            assert!(rel < prec().eps_scaled(40), "n {n}: {rel:?}");
        }
    }

    #[test]
    fn linear_sum_rule_collapses_without_gap() {
        let t = table(1.0, 0.0, 8);
        let report = identity_residuals(&t, 4, &default_z_samples(prec())).unwrap();
        assert!(report.get("linear_sum_rule").unwrap() < 1e-60);
        // direct form: n(n + 2α) = (2n + 2α + 1)(2n + 2α - 1) β_n
        let lhs = Real::from_f64(4.0 * 6.0, prec());
        let rhs = Real::from_f64(11.0 * 9.0, prec()) * t.beta(4);
        assert!((lhs - rhs).abs() < 1e-60);
    }

    #[test]
    fn full_suite_off_axis_sample() {
        let t = table(0.5, 0.4, 12);
        let z = [Complex::from_f64(0.7, 0.2, prec())];
        let report = identity_residuals(&t, 10, &z).unwrap();
        assert_eq!(
            report.len(),
            SCALAR_IDENTITIES.len() + SAMPLED_IDENTITIES.len()
        );
        for (name, v) in report.iter() {
            assert!(v < 1e-40, "{name}: {v:e}");
        }
    }

    #[test]
    fn r_squared_product_identity() {
        let t = table(2.5, 0.2, 9);
        let report = identity_residuals(&t, 7, &default_z_samples(prec())).unwrap();
        assert!(report.get("r_squared_product").unwrap() < 1e-40);
    }

    #[test]
    fn rejects_samples_near_poles() {
        let t = table(1.0, 0.3, 8);
        let near = [Complex::from_f64(0.32, 0.0, prec())];
        assert!(matches!(
            identity_residuals(&t, 3, &near),
            Err(Error::PoleProximity { .. })
        ));
        let near_one = [Complex::from_f64(-1.0, 0.01, prec())];
        assert!(identity_residuals(&t, 3, &near_one).is_err());
    }

    #[test]
    fn rejects_out_of_range_index() {
        let t = table(1.0, 0.3, 8);
        let z = default_z_samples(prec());
        assert!(identity_residuals(&t, 0, &z).is_err());
        assert!(identity_residuals(&t, 7, &z).is_err());
        assert!(identity_residuals(&t, 6, &z).is_ok());
    }
}
