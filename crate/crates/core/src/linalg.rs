//! Thin wrappers over the dense solvers in `faer`.
//!
//! Eigenvalue lists are always returned in a fixed order (real part
//! descending, ties broken by imaginary part ascending) so that reports are
//! reproducible across runs.

use std::cmp::Ordering;

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

/// Relative pivot size below which a factorization is declared singular.
const SINGULAR_PIVOT: f64 = 1e-13;

pub fn spectrum_order(a: &c64, b: &c64) -> Ordering {
    b.re.partial_cmp(&a.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

pub fn sort_spectrum(values: &mut [c64]) {
    values.sort_by(spectrum_order);
}

pub fn eigenvalues_real(m: MatRef<'_, f64>) -> Result<Vec<c64>> {
    let mut values = m.eigenvalues().map_err(|_| Error::Eigen)?;
    sort_spectrum(&mut values);
    Ok(values)
}

pub fn eigenvalues_complex(m: MatRef<'_, c64>) -> Result<Vec<c64>> {
    let mut values = m.eigenvalues().map_err(|_| Error::Eigen)?;
    sort_spectrum(&mut values);
    Ok(values)
}

/// Eigenpairs of a real matrix, eigenvectors as columns (unit 2-norm).
pub fn eigenpairs_real(m: MatRef<'_, f64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let evd = m.eigen().map_err(|_| Error::Eigen)?;
    let values: Vec<c64> = (0..m.nrows()).map(|i| evd.S()[i]).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn spectral_abscissa_complex(m: MatRef<'_, c64>) -> Result<f64> {
    let values = m.eigenvalues().map_err(|_| Error::Eigen)?;
    Ok(values.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Ratio of the smallest to the largest pivot of a fully pivoted LU.
pub fn pivot_ratio(m: MatRef<'_, f64>) -> f64 {
    let lu = m.full_piv_lu();
    let u = lu.U();
    let n = u.nrows().min(u.ncols());
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..n {
        let p = u[(i, i)].abs();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

pub fn is_singular(m: MatRef<'_, f64>) -> bool {
    pivot_ratio(m) < SINGULAR_PIVOT
}

pub fn inverse(m: MatRef<'_, f64>) -> Result<Mat<f64>> {
    if is_singular(m) {
        return Err(Error::SingularViscosity);
    }
    let lu = m.partial_piv_lu();
    Ok(lu.solve(Mat::<f64>::identity(m.nrows(), m.nrows())))
}

pub fn to_complex(m: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

pub fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].abs());
        }
    }
    out
}

pub fn is_diagonal(m: MatRef<'_, f64>) -> bool {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j && m[(i, j)] != 0.0 {
                return false;
            }
        }
    }
    true
}

fn norm_one(m: MatRef<'_, c64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// Intended for the small (n ≤ 2·dim) blocks of the time stepper, where a
/// degree-20 series on a matrix of norm ≤ 1/2 is accurate to round-off.
pub fn expm(m: MatRef<'_, c64>) -> Mat<c64> {
    let n = m.nrows();
    let norm = norm_one(m);
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scale = 0.5f64.powi(squarings as i32);
    let a = Mat::from_fn(n, n, |i, j| m[(i, j)] * scale);

    let mut result = Mat::<c64>::identity(n, n);
    let mut term = Mat::<c64>::identity(n, n);
    for k in 1..=20 {
        term = &term * &a;
        let inv_k = 1.0 / k as f64;
        term = Mat::from_fn(n, n, |i, j| term[(i, j)] * inv_k);
        result = &result + &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_is_sorted_by_real_part_descending() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { [1.0, 3.0, 2.0][i] } else { 0.0 });
        let values = eigenvalues_real(m.as_ref()).unwrap();
        let re: Vec<f64> = values.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 7.3;
        let m = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c64::new(-t, 0.0),
            (1, 0) => c64::new(t, 0.0),
            _ => c64::new(0.0, 0.0),
        });
        let e = expm(m.as_ref());
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-13);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-13);
        assert!(e[(0, 1)].im.abs() < 1e-13);
    }

    #[test]
    fn expm_of_diagonal_matches_scalar_exponential() {
        let d = [c64::new(-3.0, 2.0), c64::new(0.5, -40.0)];
        let m = Mat::from_fn(2, 2, |i, j| if i == j { d[i] } else { c64::new(0.0, 0.0) });
        let e = expm(m.as_ref());
        for i in 0..2 {
            let exact = d[i].exp();
            assert!((e[(i, i)] - exact).norm() < 1e-12 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn singular_matrix_is_detected() {
        let m = Mat::from_fn(2, 2, |i, _| [1.0, 2.0][i]);
        assert!(is_singular(m.as_ref()));
        assert!(inverse(m.as_ref()).is_err());
    }
}
