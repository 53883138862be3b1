//! Scalar arithmetic, quadrature, determinants and finite differences shared
//! by every other module. All routines are pure and deterministic in
//! `(inputs, precision)`.

mod det;
mod fd;
mod quad;
mod real;

pub use det::{small_det, small_det_complex, MAX_DET_DIM};
pub use fd::{default_step, fd_derivative, fd_derivative_complex, stencil_len, uniform_grid};
pub use quad::{gauss_jacobi_rule, gauss_legendre_rule, QuadRule};
pub use real::{Complex, Precision, Real};
