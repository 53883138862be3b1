//! The sine-kernel Fredholm determinant `det(I - K)` on `(-t, t)` with
//! `K(x, y) = sin(x - y) / (π (x - y))`, its log-derivative
//! `σ(t) = t d/dt ln det`, the σ-form Painlevé V residuals, the
//! equilibrium density of the symmetric ensemble and the real-variable
//! scaling study that compares `-H_n(t / √(n(n + 2α)))` with `σ(t)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gap::h_quantity;
use crate::numerics::{
    fd_derivative, fd_derivative_complex, gauss_jacobi_rule, gauss_legendre_rule, small_det,
    small_det_complex, uniform_grid, Complex, Precision, QuadRule, Real,
};
use crate::orthopoly::build_table;
use crate::weight::WeightParams;

pub const MIN_NYSTROM_NODES: usize = 8;
pub const START_NYSTROM_NODES: usize = 48;
pub const MAX_NYSTROM_NODES: usize = 512;

/// Nyström matrix entries `δ_ij - √(w_i w_j) sin(t(u_i - u_j)) / (π (u_i - u_j))`
/// on a Gauss–Legendre rule for `(-1, 1)`.
pub fn sine_kernel_det_with_rule(t: &Real, rule: &QuadRule) -> Result<Real> {
    if t.is_sign_negative() && !t.is_zero() {
        return Err(Error::InvalidParameter(format!(
            "interval half-length must be >= 0, got {t:?}"
        )));
    }
    let prec = rule.precision();
    let pi = Real::pi(prec);
    let m = rule.len();
    let sqrt_w: Vec<Real> = rule.weights.iter().map(Real::sqrt).collect();
    let mut rows = vec![vec![Real::zero(prec); m]; m];
    for i in 0..m {
        for j in 0..m {
            let k = if i == j {
                t / &pi
            } else {
                let d = &rule.nodes[i] - &rule.nodes[j];
                (t * &d).sin() / (&pi * &d)
            };
            let entry = -(k * &sqrt_w[i] * &sqrt_w[j]);
            rows[i][j] = if i == j { entry + 1.0 } else { entry };
        }
    }
    small_det(&rows)
}

pub fn sine_kernel_det(t: &Real, m_nodes: usize, prec: Precision) -> Result<Real> {
    check_nodes(m_nodes)?;
    sine_kernel_det_with_rule(t, &gauss_legendre_rule(m_nodes, prec)?)
}

/// The same determinant with a complex interval parameter; the kernel is
/// entire in `t`, so this is its analytic continuation.
pub fn sine_kernel_det_complex(t: &Complex, rule: &QuadRule) -> Result<Complex> {
    let prec = rule.precision();
    let pi = Real::pi(prec);
    let m = rule.len();
    let sqrt_w: Vec<Real> = rule.weights.iter().map(Real::sqrt).collect();
    let zero = Complex::from_f64(0.0, 0.0, prec);
    let mut rows = vec![vec![zero; m]; m];
    for i in 0..m {
        for j in 0..m {
            let k = if i == j {
                t.scale(&(Real::one(prec) / &pi))
            } else {
                let d = &rule.nodes[i] - &rule.nodes[j];
                (t * &d).sin().scale(&(Real::one(prec) / (&pi * &d)))
            };
            let entry = -k.scale(&(&sqrt_w[i] * &sqrt_w[j]));
            rows[i][j] = if i == j { entry + 1.0 } else { entry };
        }
    }
    small_det_complex(&rows)
}

fn check_nodes(m: usize) -> Result<()> {
    if !(MIN_NYSTROM_NODES..=MAX_NYSTROM_NODES).contains(&m) {
        return Err(Error::InvalidParameter(format!(
            "Nyström node count must lie in {MIN_NYSTROM_NODES}..={MAX_NYSTROM_NODES}, got {m}"
        )));
    }
    Ok(())
}

/// Determinant with node doubling from 48 until successive values differ by
/// less than `2^(-bits/2)`. Returns the finer value and its node count.
pub fn sine_kernel_det_converged(t: &Real, prec: Precision) -> Result<(Real, usize)> {
    let tol = prec.pow2(-(prec.bits() as i32) / 2);
    let mut m = START_NYSTROM_NODES;
    let mut coarse = sine_kernel_det(t, m, prec)?;
    while 2 * m <= MAX_NYSTROM_NODES {
        m *= 2;
        let fine = sine_kernel_det(t, m, prec)?;
        if (&fine - &coarse).abs() < tol {
            return Ok((fine, m));
        }
        coarse = fine;
    }
    Err(Error::NonConvergence {
        what: format!("Nyström node doubling at t = {}", t.to_f64()),
        budget: MAX_NYSTROM_NODES,
    })
}

/// `Σ w_i K(x_i, x_i)`, the discrete trace of `K` on `(-t, t)`.
pub fn nystrom_trace(t: &Real, m_nodes: usize, prec: Precision) -> Result<Real> {
    check_nodes(m_nodes)?;
    let rule = gauss_legendre_rule(m_nodes, prec)?;
    let pi = Real::pi(prec);
    Ok(rule.integrate(|_| t / &pi))
}

#[derive(Debug, Clone)]
pub struct SigmaOracle {
    pub t: Real,
    pub det_value: Real,
    pub sigma: Real,
    pub sigma_p: Real,
    pub sigma_pp: Real,
    pub nodes_used: usize,
}

/// `(σ, σ', σ'')` from `L = ln D` given `D, D', D'', D'''` at `t`:
/// `σ = tL'`, `σ' = L' + tL''`, `σ'' = 2L'' + tL'''`.
fn sigma_jet_from_det<T>(t: &T, d: [&T; 4]) -> (T, T, T)
where
    T: Clone,
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T>
        + std::ops::Div<&'a T, Output = T>
        + std::ops::Add<&'a T, Output = T>
        + std::ops::Sub<&'a T, Output = T>
        + std::ops::Mul<f64, Output = T>,
{
    let [d0, d1, d2, d3] = d;
    let l1 = d1 / d0;
    let q2 = d2 / d0;
    let q3 = d3 / d0;
    let l1_sq = &l1 * &l1;
    let l2 = &q2 - &l1_sq;
    let l3 = &(&q3 - &(&(&l1 * &q2) * 3.0)) + &(&(&l1_sq * &l1) * 2.0);
    let sigma = t * &l1;
    let sigma_p = &l1 + &(t * &l2);
    let sigma_pp = &(&l2 * 2.0) + &(t * &l3);
    (sigma, sigma_p, sigma_pp)
}

/// Step balancing truncation against roundoff for the third derivative.
pub fn third_derivative_step(prec: Precision) -> Real {
    prec.pow2(-(prec.bits() as i32) / 7)
}

/// `σ(t)` and its first two derivatives from a seven-point grid of
/// determinants around `t` at a fixed node count.
pub fn sigma_oracle(t: &Real, prec: Precision) -> Result<SigmaOracle> {
    sigma_oracle_with_step(t, &third_derivative_step(prec), prec)
}

pub fn sigma_oracle_with_step(t: &Real, step: &Real, prec: Precision) -> Result<SigmaOracle> {
    if !(t > &(step * 3.0)) {
        return Err(Error::InvalidParameter(format!(
            "t = {} too close to 0 for the derivative grid",
            t.to_f64()
        )));
    }
    let (det_value, nodes_used) = sine_kernel_det_converged(t, prec)?;
    let rule = gauss_legendre_rule(nodes_used, prec)?;
    let grid = uniform_grid(t, step, 3);
    let values = grid
        .par_iter()
        .map(|s| sine_kernel_det_with_rule(s, &rule))
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<(Real, Real)> = grid.into_iter().zip(values).collect();
    let d0 = samples[3].1.clone();
    let d1 = fd_derivative(&samples, 1, step)?;
    let d2 = fd_derivative(&samples, 2, step)?;
    let d3 = fd_derivative(&samples, 3, step)?;
    let (sigma, sigma_p, sigma_pp) = sigma_jet_from_det(t, [&d0, &d1, &d2, &d3]);
    Ok(SigmaOracle {
        t: t.clone(),
        det_value,
        sigma,
        sigma_p,
        sigma_pp,
        nodes_used,
    })
}

/// Jet `(S, S', S'')` of `S(τ) = σ(τ / (4i))` at real `τ`, built from
/// determinants at the imaginary interval parameter `-iτ/4`.
#[derive(Debug, Clone)]
pub struct ContinuedSigma {
    pub tau: Real,
    pub sigma: Complex,
    pub sigma_p: Complex,
    pub sigma_pp: Complex,
    pub nodes_used: usize,
}

pub fn continued_sigma(tau: &Real, prec: Precision) -> Result<ContinuedSigma> {
    let step = third_derivative_step(prec);
    let to_t = |s: &Real| Complex::new(Real::zero(prec), -(s.mul_pow2(-2)));
    // node count from the real determinant at |t|, doubled for the growth of sinh
    let (_, m) = sine_kernel_det_converged(&tau.mul_pow2(-2), prec)?;
    let m = (2 * m).min(MAX_NYSTROM_NODES);
    let rule = gauss_legendre_rule(m, prec)?;
    let grid = uniform_grid(tau, &step, 3);
    let values = grid
        .par_iter()
        .map(|s| sine_kernel_det_complex(&to_t(s), &rule))
        .collect::<Result<Vec<_>>>()?;
    let d0 = values[3].clone();
    let d1 = fd_derivative_complex(&values, 1, &step)?;
    let d2 = fd_derivative_complex(&values, 2, &step)?;
    let d3 = fd_derivative_complex(&values, 3, &step)?;
    let tau_c = Complex::from_real(tau.clone());
    let (sigma, sigma_p, sigma_pp) = sigma_jet_from_det(&tau_c, [&d0, &d1, &d2, &d3]);
    Ok(ContinuedSigma {
        tau: tau.clone(),
        sigma,
        sigma_p,
        sigma_pp,
        nodes_used: m,
    })
}

/// `(tσ'')^2 - [σ - tσ' + 2σ'^2 + (ν0+ν1+ν2+ν3)σ']^2 + 4 Π (ν_k + σ')`.
pub fn sigma_pv_residual(
    sigma: &Real,
    sigma_p: &Real,
    sigma_pp: &Real,
    t: &Real,
    nu: [f64; 4],
) -> Real {
    let nu_sum: f64 = nu.iter().sum();
    let lhs = (t * sigma_pp).square();
    let bracket = sigma - t * sigma_p + sigma_p.square().mul_pow2(1) + sigma_p * nu_sum;
    let mut prod = Real::one(sigma.precision());
    for v in nu {
        prod *= sigma_p + v;
    }
    lhs - bracket.square() + prod.mul_pow2(2)
}

pub fn sigma_pv_residual_complex(
    sigma: &Complex,
    sigma_p: &Complex,
    sigma_pp: &Complex,
    t: &Complex,
    nu: [f64; 4],
) -> Complex {
    let nu_sum: f64 = nu.iter().sum();
    let lhs = (t * sigma_pp).square();
    let bracket = sigma - &(t * sigma_p) + sigma_p.square() * 2.0 + sigma_p * nu_sum;
    let mut prod = Complex::from_f64(1.0, 0.0, sigma.precision());
    for v in nu {
        prod *= sigma_p + v;
    }
    lhs - bracket.square() + prod * 4.0
}

/// The `ν = 0` equation written out:
/// `(tσ'')^2 + 4tσ'^3 - (4σ + t^2)σ'^2 + 2tσσ' - σ^2`.
pub fn sigma_pv_expanded(sigma: &Real, sigma_p: &Real, sigma_pp: &Real, t: &Real) -> Real {
    (t * sigma_pp).square() + (t * sigma_p.powi(3)).mul_pow2(2)
        - (sigma.mul_pow2(2) + t.square()) * sigma_p.square()
        + (t * sigma * sigma_p).mul_pow2(1)
        - sigma.square()
}

/// Limit equation of the scaled `H_n` equation for a general scaling
/// constant `c` (given as `c^2`):
/// `(tσ'')^2 + 4tσ'^3 - (4c^2σ - 16t^2)σ'^2/c^2 - 32tσσ'/c^2 + 16σ^2/c^2`.
/// With `c^2 = -16` this is the `ν = 0` equation; the real sine-kernel
/// `σ` with the probability normalization solves it for `c^2 = 1`.
pub fn scaled_limit_residual(
    sigma: &Real,
    sigma_p: &Real,
    sigma_pp: &Real,
    t: &Real,
    c_squared: f64,
) -> Real {
    (t * sigma_pp).square() + (t * sigma_p.powi(3)).mul_pow2(2)
        - (sigma * (4.0 * c_squared) - t.square() * 16.0) * sigma_p.square() / c_squared
        - (t * sigma * sigma_p) * (32.0 / c_squared)
        + sigma.square() * (16.0 / c_squared)
}

/// Scale for the residuals above: the largest of their individual terms.
pub fn sigma_pv_scale(sigma: &Real, sigma_p: &Real, sigma_pp: &Real, t: &Real) -> Real {
    [
        (t * sigma_pp).square(),
        (t * sigma_p.powi(3)).abs().mul_pow2(4),
        (sigma.abs() * 4.0 + t.square() * 16.0) * sigma_p.square(),
        (t * sigma * sigma_p).abs() * 32.0,
        sigma.square() * 16.0,
    ]
    .into_iter()
    .fold(
        Real::zero(sigma.precision()),
        |m, x| if x > m { x } else { m },
    )
}

#[derive(Debug, Clone)]
pub struct DensityProfile {
    pub n: usize,
    pub alpha: Real,
    /// Support endpoint `√(n(n + 2α)) / (n + α)`.
    pub b: Real,
    /// `ρ(0) = √(n(n + 2α)) / π`.
    pub rho0: Real,
}

/// Large-n eigenvalue density `ρ(x) = √(n(n+2α) - (n+α)^2 x^2) / (π (1 - x^2))` on `(-b, b)`.
pub fn equilibrium_density(n: usize, alpha: &Real) -> Result<DensityProfile> {
    if n == 0 || !alpha.is_sign_positive() || alpha.is_zero() {
        return Err(Error::InvalidParameter(format!(
            "density needs n >= 1 and α > 0, got n = {n}, α = {alpha:?}"
        )));
    }
    let prec = alpha.precision();
    let nf = n as f64;
    let root = (nf * (alpha.mul_pow2(1) + nf)).sqrt();
    Ok(DensityProfile {
        n,
        alpha: alpha.clone(),
        b: &root / (alpha + nf),
        rho0: root / Real::pi(prec),
    })
}

impl DensityProfile {
    pub fn rho_at(&self, x: &Real) -> Result<Real> {
        let prec = x.precision();
        if x.abs() > &self.b * (Real::one(prec) + prec.eps_scaled(4)) {
            return Err(Error::InvalidParameter(format!(
                "|x| = {} outside the support (b = {})",
                x.abs().to_f64(),
                self.b.to_f64()
            )));
        }
        let nf = self.n as f64;
        let inner = nf * (self.alpha.mul_pow2(1) + nf) - (&self.alpha + nf).square() * x.square();
        let inner = if inner.is_sign_negative() {
            Real::zero(prec)
        } else {
            inner
        };
        Ok(inner.sqrt() / (Real::pi(prec) * (1.0 - x.square())))
    }

    /// `∫_{-b}^{b} ρ` by an `m`-point Gauss–Jacobi rule for `√(1 - u^2)`.
    pub fn mass(&self, m: usize, prec: Precision) -> Result<Real> {
        let half = Real::from_f64(0.5, prec);
        let rule = gauss_jacobi_rule(m, &half, &half, prec)?;
        let b2 = self.b.square();
        let integral = rule.integrate(|u| Real::one(prec) / (1.0 - &b2 * u.square()));
        Ok((&self.alpha + self.n as f64) * &b2 * integral / Real::pi(prec))
    }
}

#[derive(Debug, Clone)]
pub struct ScalingCell {
    pub n: usize,
    pub t: Real,
    pub a: Real,
    pub sigma_n: Real,
    pub sigma_oracle: Real,
    pub error: Real,
}

/// For each `(n, t)`: `a = t / √(n(n + 2α))`, `σ_n = -H_n(a)` and the error
/// against the sine-kernel `σ(t)`. Cells come back ordered by `(t, n)` as given.
pub fn scaling_convergence(
    alpha: &Real,
    n_list: &[usize],
    t_list: &[Real],
    prec: Precision,
) -> Result<Vec<ScalingCell>> {
    let oracles = t_list
        .par_iter()
        .map(|t| sigma_oracle(t, prec))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> = (0..t_list.len())
        .flat_map(|ti| n_list.iter().map(move |&n| (ti, n)))
        .collect();
    cells
        .par_iter()
        .map(|&(ti, n)| {
            let t = &t_list[ti];
            let profile = equilibrium_density(n, &alpha.with_precision(prec))?;
            let a = t / (&profile.rho0 * Real::pi(prec));
            if !(a < 0.5) || t.is_sign_negative() {
                return Err(Error::InvalidParameter(format!(
                    "scaled gap a = {} for n = {n}, t = {} leaves the bulk (need a < 0.5)",
                    a.to_f64(),
                    t.to_f64()
                )));
            }
            let wp = WeightParams::new(alpha.with_precision(prec), a.clone())?;
            let table = build_table(&wp, n, prec)?;
            let sigma_n = -h_quantity(&table, n)?;
            let oracle = oracles[ti].sigma.clone();
            let error = (&sigma_n - &oracle).abs();
            Ok(ScalingCell {
                n,
                t: t.clone(),
                a,
                sigma_n,
                sigma_oracle: oracle,
                error,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prec() -> Precision {
        Precision::default()
    }

    fn real(x: f64) -> Real {
        Real::from_f64(x, prec())
    }

    #[test]
    fn empty_interval() {
        assert_eq!(sine_kernel_det(&real(0.0), 16, prec()).unwrap(), 1.0);
        assert!(sine_kernel_det(&real(-0.1), 16, prec()).is_err());
        assert!(sine_kernel_det(&real(1.0), 4, prec()).is_err());
    }

    #[test]
    fn node_doubling_is_stable() {
        let d48 = sine_kernel_det(&real(1.0), 48, prec()).unwrap();
        let d96 = sine_kernel_det(&real(1.0), 96, prec()).unwrap();
        assert!((&d48 - &d96).abs() < 1e-25);
        assert!(d96 > 0.0 && d96 < 1.0);
    }

    #[test]
    fn trace_and_small_interval() {
        let t = real(1e-3);
        let pi = Real::pi(prec());
        let two_t_pi = t.mul_pow2(1) / &pi;
        let tr = nystrom_trace(&t, 16, prec()).unwrap();
        assert!(((&tr - &two_t_pi) / &two_t_pi).abs() < 1e-5);
        let minus_log = -sine_kernel_det(&t, 16, prec()).unwrap().ln();
        // next term: tr K^2 / 2 = 2t^2/π^2 + O(t^4)
        let second = (&minus_log - &two_t_pi) / t.square();
        let expected = Real::from_f64(2.0, prec()) / pi.square();
        assert!(((second - &expected) / expected).abs() < 1e-2);
    }

    #[test]
    fn pv_trivial_jets() {
        let z = real(0.0);
        assert!(sigma_pv_residual(&z, &z, &z, &real(1.3), [0.0; 4]).is_zero());
        let t = real(0.7);
        let r = sigma_pv_residual(&-&t, &real(-1.0), &z, &t, [0.0; 4]);
        assert!(r.abs() < prec().eps_scaled(4));
    }

    proptest! {
        #[test]
        fn pv_forms_agree(s in -3.0f64..3.0, sp in -3.0f64..3.0, spp in -3.0f64..3.0, t in 0.01f64..4.0) {
            let (s, sp, spp, t) = (real(s), real(sp), real(spp), real(t));
            let jmo = sigma_pv_residual(&s, &sp, &spp, &t, [0.0; 4]);
            let expanded = sigma_pv_expanded(&s, &sp, &spp, &t);
            let scale = sigma_pv_scale(&s, &sp, &spp, &t);
            prop_assert!(((jmo - &expanded) / scale).abs() < prec().eps_scaled(8));
            let limit = scaled_limit_residual(&s, &sp, &spp, &t, -16.0);
            prop_assert!(((limit - expanded) / sigma_pv_scale(&s, &sp, &spp, &t)).abs() < prec().eps_scaled(8));
        }
    }

    #[test]
    fn oracle_solves_the_real_limit_equation() {
        for t in [0.1, 1.0, 3.0] {
            let o = sigma_oracle(&real(t), prec()).unwrap();
            let res = scaled_limit_residual(&o.sigma, &o.sigma_p, &o.sigma_pp, &o.t, 1.0);
            assert!(res.abs() < 1e-8, "t = {t}: {res:?}");
        }
    }

    #[test]
    fn continued_sigma_solves_the_pv_form() {
        let s = continued_sigma(&real(1.0), prec()).unwrap();
        let tau = Complex::from_real(s.tau.clone());
        let res = sigma_pv_residual_complex(&s.sigma, &s.sigma_p, &s.sigma_pp, &tau, [0.0; 4]);
        assert!(res.abs() < 1e-8, "{res:?}");
    }

    #[test]
    fn oracle_sign_and_size() {
        let o = sigma_oracle(&real(1.0), prec()).unwrap();
        assert!((o.sigma.to_f64() + 1.26032).abs() < 1e-4);
    }

    #[test]
    fn density_profile() {
        let d = equilibrium_density(10, &real(1.0)).unwrap();
        let expected = Real::from_f64(120.0, prec()).sqrt() / Real::pi(prec());
        assert!((&d.rho0 - expected).abs() < prec().eps_scaled(4));
        assert!(d.rho_at(&d.b).unwrap().abs() < 1e-30);
        assert!(d.rho_at(&(-&d.b)).unwrap().abs() < 1e-30);
        assert!(d.rho_at(&(&d.b * 1.01)).is_err());
        // poles of the integrand sit at |u| = 1/b, just outside the interval
        assert!((d.mass(400, prec()).unwrap() - 10.0).abs() < 1e-20);
    }

    #[test]
    fn scaling_error_shrinks_with_n() {
        let cells = scaling_convergence(&real(1.0), &[20, 40], &[real(1.0)], prec()).unwrap();
        assert!(cells[1].error < cells[0].error);
        assert!(cells[1].error < 0.05);
    }
}
