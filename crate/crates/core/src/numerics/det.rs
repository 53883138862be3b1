use super::real::{Complex, Real};
use crate::error::{Error, Result};

pub const MAX_DET_DIM: usize = 512;

fn check_square<T>(matrix: &[Vec<T>]) -> Result<usize> {
    let n = matrix.len();
    if n > MAX_DET_DIM {
        return Err(Error::InvalidParameter(format!(
            "determinant dimension {n} exceeds {MAX_DET_DIM}"
        )));
    }
    for (row, r) in matrix.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                row,
                cols: r.len(),
            });
        }
    }
    Ok(n)
}

/// Determinant by Gaussian elimination with partial pivoting. The empty
/// matrix has determinant one, which callers must supply a precision for
/// through a non-empty input; it is rejected here.
pub fn small_det(matrix: &[Vec<Real>]) -> Result<Real> {
    let n = check_square(matrix)?;
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let mut a: Vec<Vec<Real>> = matrix.to_vec();
    let mut det = Real::one(a[0][0].precision());
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .expect("finite matrix entries")
            })
            .expect("non-empty pivot range");
        if a[pivot][col].is_zero() {
            return Ok(Real::zero(det.precision()));
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let (upper, lower) = a.split_at_mut(col + 1);
        let prow = &upper[col];
        det *= &prow[col];
        for row in lower.iter_mut() {
            let factor = &row[col] / &prow[col];
            for k in col + 1..n {
                let t = &factor * &prow[k];
                row[k] -= t;
            }
        }
    }
    Ok(det)
}

/// Complex counterpart of [`small_det`], pivoting on modulus.
pub fn small_det_complex(matrix: &[Vec<Complex>]) -> Result<Complex> {
    let n = check_square(matrix)?;
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    let mut a: Vec<Vec<Complex>> = matrix.to_vec();
    let prec = a[0][0].precision();
    let mut det = Complex::from_f64(1.0, 0.0, prec);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .expect("finite matrix entries")
            })
            .expect("non-empty pivot range");
        if a[pivot][col].is_zero() {
            return Ok(Complex::from_f64(0.0, 0.0, prec));
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let (upper, lower) = a.split_at_mut(col + 1);
        let prow = &upper[col];
        det *= &prow[col];
        let inv = prow[col].recip();
        for row in lower.iter_mut() {
            let factor = &row[col] * &inv;
            for k in col + 1..n {
                let t = &factor * &prow[k];
                row[k] -= t;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Precision;

    fn mat(rows: &[&[f64]]) -> Vec<Vec<Real>> {
        let p = Precision::default();
        rows.iter()
            .map(|r| r.iter().map(|&x| Real::from_f64(x, p)).collect())
            .collect()
    }

    #[test]
    fn identity_and_diagonal() {
        let id = mat(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(small_det(&id).unwrap(), 1.0);
        assert_eq!(small_det(&mat(&[&[2.0, 0.0], &[0.0, 3.0]])).unwrap(), 6.0);
    }

    #[test]
    fn pivoting_tracks_sign() {
        assert_eq!(small_det(&mat(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap(), -1.0);
        assert_eq!(small_det(&mat(&[&[1.0, 2.0], &[2.0, 4.0]])).unwrap(), 0.0);
    }

    #[test]
    fn not_square() {
        let m = mat(&[&[1.0, 2.0], &[3.0]]);
        assert!(matches!(
            small_det(&m),
            Err(Error::NotSquare { row: 1, .. })
        ));
    }

    #[test]
    fn complex_rotation() {
        let p = Precision::default();
        // [[i, 0], [0, i]] -> -1
        let i = Complex::from_f64(0.0, 1.0, p);
        let z = Complex::from_f64(0.0, 0.0, p);
        let d = small_det_complex(&[vec![i.clone(), z.clone()], vec![z, i]]).unwrap();
        assert_eq!(d.re, -1.0);
        assert!(d.im.is_zero());
    }
}
