//! Dense least squares by Householder QR, for the few-column fits here.

use crate::error::{Error, Result};
use crate::real::Real;

/// Solution of `min ‖A x − b‖₂` with the residual vector.
#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares<T> {
    pub x: Vec<T>,
    pub residuals: Vec<T>,
}

/// `a` is row-major with `cols` columns. Fails on rank deficiency.
pub fn lstsq<T: Real>(a: &[T], b: &[T], cols: usize) -> Result<LeastSquares<T>> {
    let rows = b.len();
    if cols == 0 || a.len() != rows * cols {
        return Err(Error::invalid("least squares: matrix shape mismatch"));
    }
    if rows < cols {
        return Err(Error::TooFewPoints { needed: cols, got: rows });
    }
    let mut m: Vec<T> = a.to_vec();
    let mut y: Vec<T> = b.to_vec();
    let at = |i: usize, j: usize| i * cols + j;
    let mut diag = vec![T::zero(); cols];
    let col_scale: Vec<T> = (0..cols)
        .map(|j| (0..rows).map(|i| m[at(i, j)].abs()).fold(T::zero(), T::max))
        .collect();
    for k in 0..cols {
        let norm = (k..rows).map(|i| m[at(i, k)] * m[at(i, k)]).fold(T::zero(), |s, x| s + x).sqrt();
        if !(norm > T::lit(1e-12) * col_scale[k].max(T::min_positive_value())) {
            return Err(Error::invalid("least squares: columns are linearly dependent"));
        }
        let alpha = if m[at(k, k)] > T::zero() { -norm } else { norm };
        // v = x − α e₁, stored in place
        m[at(k, k)] = m[at(k, k)] - alpha;
        let vnorm2 = (k..rows).map(|i| m[at(i, k)] * m[at(i, k)]).fold(T::zero(), |s, x| s + x);
        for j in k + 1..cols {
            let dot = (k..rows).map(|i| m[at(i, k)] * m[at(i, j)]).fold(T::zero(), |s, x| s + x);
            let f = T::lit(2.0) * dot / vnorm2;
            for i in k..rows {
                m[at(i, j)] = m[at(i, j)] - f * m[at(i, k)];
            }
        }
        let dot = (k..rows).map(|i| m[at(i, k)] * y[i]).fold(T::zero(), |s, x| s + x);
        let f = T::lit(2.0) * dot / vnorm2;
        for i in k..rows {
            y[i] = y[i] - f * m[at(i, k)];
        }
        diag[k] = alpha;
    }
    let mut x = vec![T::zero(); cols];
    for k in (0..cols).rev() {
        let mut s = y[k];
        for j in k + 1..cols {
            s = s - m[at(k, j)] * x[j];
        }
        x[k] = s / diag[k];
    }
    let residuals = (0..rows)
        .map(|i| {
            let fit = (0..cols).map(|j| a[at(i, j)] * x[j]).fold(T::zero(), |s, v| s + v);
            b[i] - fit
        })
        .collect();
    Ok(LeastSquares { x, residuals })
}
