//! Fourier collocation on an `X`-periodic grid `x_m = m X / M`.

use std::f64::consts::PI;

use faer::Mat;
use rustfft::FftPlanner;

use crate::c64;

/// Signed mode index of FFT bin `j` for a length-`m` transform.
pub fn mode_index(j: usize, m: usize) -> i64 {
    if j <= m / 2 {
        j as i64
    } else {
        j as i64 - m as i64
    }
}

/// Normalized discrete Fourier coefficients `f̂_k = (1/M) Σ f(x_m) e^{−2πikm/M}`
/// in FFT bin order.
pub fn forward(values: &[f64]) -> Vec<c64> {
    let m = values.len();
    let mut buf: Vec<c64> = values.iter().map(|&v| c64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

pub fn forward_complex(values: &mut [c64]) {
    let m = values.len();
    FftPlanner::new().plan_fft_forward(m).process(values);
    let scale = 1.0 / m as f64;
    values.iter_mut().for_each(|z| *z *= scale);
}

/// Inverse of [`forward`] (no scaling).
pub fn inverse(coeffs: &mut [c64]) {
    let m = coeffs.len();
    FftPlanner::new().plan_fft_inverse(m).process(coeffs);
}

/// Spectral derivative of periodic samples; the Nyquist mode is dropped.
pub fn derivative(values: &[f64], period: f64) -> Vec<f64> {
    let m = values.len();
    let mut coeffs = forward(values);
    let base = 2.0 * PI / period;
    for (j, z) in coeffs.iter_mut().enumerate() {
        let k = mode_index(j, m);
        if m % 2 == 0 && j == m / 2 {
            *z = c64::new(0.0, 0.0);
        } else {
            *z *= c64::new(0.0, base * k as f64);
        }
    }
    inverse(&mut coeffs);
    coeffs.iter().map(|z| z.re).collect()
}

/// Dense first-derivative collocation matrix for even `m`:
/// `D[j][l] = (π/X) (−1)^{j−l} cot((j − l) π / M)` off the diagonal.
pub fn differentiation_matrix(m: usize, period: f64) -> Mat<f64> {
    assert!(m % 2 == 0, "collocation grid size must be even");
    let scale = PI / period;
    Mat::from_fn(m, m, |j, l| {
        if j == l {
            0.0
        } else {
            let diff = j as i64 - l as i64;
            let sign = if diff.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            sign * scale / (diff as f64 * PI / m as f64).tan()
        }
    })
}

pub fn grid_points(m: usize, period: f64) -> Vec<f64> {
    (0..m).map(|j| j as f64 * period / m as f64).collect()
}
