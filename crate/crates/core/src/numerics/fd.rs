//! Central finite differences, fourth-order accurate.

use super::real::{Complex, Precision, Real};
use crate::error::{Error, Result};

/// Stencil coefficients on offsets `-k..=k` and the power of the step in the denominator.
fn stencil(order: u8) -> Result<(&'static [f64], f64, i32)> {
    match order {
        1 => Ok((&[1.0, -8.0, 0.0, 8.0, -1.0], 12.0, 1)),
        2 => Ok((&[-1.0, 16.0, -30.0, 16.0, -1.0], 12.0, 2)),
        3 => Ok((&[1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0], 8.0, 3)),
        _ => Err(Error::InvalidStencil(format!(
            "derivative order {order} unsupported (1, 2 or 3)"
        ))),
    }
}

/// Number of samples a centred stencil of this order needs.
pub fn stencil_len(order: u8) -> usize {
    stencil(order).map(|(c, _, _)| c.len()).unwrap_or(0)
}

/// Default step `2^(-bits/4)`.
pub fn default_step(prec: Precision) -> Real {
    prec.pow2(-(prec.bits() as i32) / 4)
}

/// Derivative of order 1, 2 (or 3, seven points) at the central sample of
/// `(x, f(x))` pairs on a uniform grid with spacing `step`.
pub fn fd_derivative(samples: &[(Real, Real)], order: u8, step: &Real) -> Result<Real> {
    let (coeffs, denom, power) = stencil(order)?;
    if samples.len() < coeffs.len() || samples.len().is_multiple_of(2) {
        return Err(Error::InvalidStencil(format!(
            "order {order} needs an odd number of at least {} points, got {}",
            coeffs.len(),
            samples.len()
        )));
    }
    if !step.is_sign_positive() {
        return Err(Error::InvalidStencil("step must be positive".into()));
    }
    let prec = step.precision();
    let span = samples
        .iter()
        .map(|(x, _)| x.abs())
        .fold(Real::zero(prec), |m, x| if x > m { x } else { m });
    let slack = step * 1e-6 + span * prec.eps_scaled(3);
    for pair in samples.windows(2) {
        let gap = &pair[1].0 - &pair[0].0;
        if (gap - step).abs() > slack {
            return Err(Error::InvalidStencil(
                "grid is not uniform at the given step".into(),
            ));
        }
    }
    let mid = samples.len() / 2;
    let half = coeffs.len() / 2;
    let window = &samples[mid - half..=mid + half];
    let mut acc = Real::zero(prec);
    for (c, (_, f)) in coeffs.iter().zip(window) {
        if *c != 0.0 {
            acc += f * *c;
        }
    }
    Ok(acc / (step.powi(power) * denom))
}

/// Same stencils applied to complex samples on an implicit uniform grid.
pub fn fd_derivative_complex(values: &[Complex], order: u8, step: &Real) -> Result<Complex> {
    let (coeffs, denom, power) = stencil(order)?;
    if values.len() < coeffs.len() || values.len().is_multiple_of(2) {
        return Err(Error::InvalidStencil(format!(
            "order {order} needs an odd number of at least {} points, got {}",
            coeffs.len(),
            values.len()
        )));
    }
    let mid = values.len() / 2;
    let half = coeffs.len() / 2;
    let prec = step.precision();
    let mut acc = Complex::from_f64(0.0, 0.0, prec);
    for (c, f) in coeffs.iter().zip(&values[mid - half..=mid + half]) {
        if *c != 0.0 {
            acc += f * *c;
        }
    }
    let scale = Real::one(prec) / (step.powi(power) * denom);
    Ok(acc.scale(&scale))
}

/// Uniform grid `center + k * step`, `k = -half..=half`.
pub fn uniform_grid(center: &Real, step: &Real, half: usize) -> Vec<Real> {
    let h = half as i64;
    (-h..=h).map(|k| center + step * (k as f64)).collect()
}
