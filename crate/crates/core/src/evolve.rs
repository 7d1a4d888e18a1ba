//! Direct integration of `u_t = −((A(ε) − cI)u + N(u))_x + D u_xx` on a
//! periodic domain in the co-moving frame.
//!
//! Exponential Euler in Fourier space: the linear part is integrated exactly
//! per mode, the nonlinear flux explicitly with 2/3-rule dealiasing. Mode
//! zero is left untouched, so each component's mean is conserved exactly.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::error::{Error, Result};
use crate::hill::StabilityVerdict;
use crate::linalg;
use crate::models::SystemSpec;
use crate::profile::{oscillation, PeriodicProfile};

/// Norm above which a run is treated as blown up.
const BLOWUP_NORM: f64 = 1e8;

/// Precomputed exponential-Euler propagator for one `(spec, c, ε, L, M, dt)`.
pub struct Stepper {
    n: usize,
    m: usize,
    dt: f64,
    spec: SystemSpec,
    wavenumbers: Vec<f64>,
    keep: Vec<bool>,
    /// `e^{L_k dt}` per mode, row-major `n × n`.
    exp: Vec<Vec<c64>>,
    /// `dt φ₁(L_k dt)` per mode.
    phi: Vec<Vec<c64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Symbol of the linear part, `−iκ(A(ε) − cI) − κ²D`.
pub fn linear_symbol(spec: &SystemSpec, eps: f64, speed: f64, kappa: f64) -> Mat<c64> {
    let a = spec.evaluate_a(eps);
    let n = spec.n();
    Mat::from_fn(n, n, |i, j| {
        let shifted = a[(i, j)] - if i == j { speed } else { 0.0 };
        c64::new(-kappa * kappa * spec.d[(i, j)], -kappa * shifted)
    })
}

impl Stepper {
    pub fn new(spec: &SystemSpec, eps: f64, speed: f64, length: f64, m: usize, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !(length > 0.0) {
            return Err(Error::InvalidArgument("time step and domain length must be positive".into()));
        }
        if m < 4 {
            return Err(Error::InvalidArgument(format!("grid size {m} too small")));
        }
        let n = spec.n();
        let wavenumbers: Vec<f64> = (0..m)
            .map(|j| 2.0 * PI * crate::spectral::mode_index(j, m) as f64 / length)
            .collect();
        let keep: Vec<bool> = (0..m)
            .map(|j| {
                let k = crate::spectral::mode_index(j, m).unsigned_abs() as usize;
                3 * k < m && !(m % 2 == 0 && j == m / 2)
            })
            .collect();
        let mut exp = Vec::with_capacity(m);
        let mut phi = Vec::with_capacity(m);
        for &kappa in &wavenumbers {
            let l = linear_symbol(spec, eps, speed, kappa);
            // exp([[L dt, I], [0, 0]]) = [[e^{L dt}, φ₁(L dt)], [0, I]].
            let aug = Mat::from_fn(2 * n, 2 * n, |i, j| {
                if i < n && j < n {
                    l[(i, j)] * dt
                } else if i < n && j == i + n {
                    c64::new(1.0, 0.0)
                } else {
                    c64::new(0.0, 0.0)
                }
            });
            let e = linalg::expm(aug.as_ref());
            exp.push((0..n * n).map(|r| e[(r / n, r % n)]).collect());
            phi.push((0..n * n).map(|r| e[(r / n, n + r % n)] * dt).collect());
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            m,
            dt,
            spec: spec.clone(),
            wavenumbers,
            keep,
            exp,
            phi,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn transform(&self, state: &Mat<f64>) -> Vec<Vec<c64>> {
        (0..self.n)
            .map(|i| {
                let mut buf: Vec<c64> = (0..self.m).map(|r| c64::new(state[(r, i)], 0.0)).collect();
                self.forward.process(&mut buf);
                buf
            })
            .collect()
    }

    /// One exponential-Euler step.
    pub fn step(&self, state: &Mat<f64>) -> Mat<f64> {
        let (n, m) = (self.n, self.m);
        let hat = self.transform(state);
        let mut flux = Mat::<f64>::zeros(m, n);
        for r in 0..m {
            let u: Vec<f64> = (0..n).map(|i| state[(r, i)]).collect();
            for (i, v) in self.spec.nonlinear_flux(&u).into_iter().enumerate() {
                flux[(r, i)] = v;
            }
        }
        let flux_hat = self.transform(&flux);
        let mut next: Vec<Vec<c64>> = vec![vec![c64::new(0.0, 0.0); m]; n];
        for k in 0..m {
            let e = &self.exp[k];
            let p = &self.phi[k];
            let ik = c64::new(0.0, self.wavenumbers[k]);
            for i in 0..n {
                let mut acc = c64::new(0.0, 0.0);
                for j in 0..n {
                    acc += e[i * n + j] * hat[j][k];
                    if self.keep[k] {
                        acc -= p[i * n + j] * ik * flux_hat[j][k];
                    }
                }
                next[i][k] = acc;
            }
        }
        let scale = 1.0 / m as f64;
        let mut out = Mat::<f64>::zeros(m, n);
        for (i, mut buf) in next.into_iter().enumerate() {
            self.inverse.process(&mut buf);
            for r in 0..m {
                out[(r, i)] = buf[r].re * scale;
            }
        }
        out
    }
}

/// One step of the exponential-Euler scheme (builds a fresh propagator; use
/// [`Stepper`] for repeated steps).
pub fn step_imex(state: &Mat<f64>, dt: f64, spec: &SystemSpec, speed: f64, eps: f64, length: f64) -> Result<Mat<f64>> {
    let stepper = Stepper::new(spec, eps, speed, length, state.nrows(), dt)?;
    let next = stepper.step(state);
    if next.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).any(|v| !v.is_finite()) {
        return Err(Error::Blowup { t: dt });
    }
    Ok(next)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionRun {
    pub dt: f64,
    pub t_final: f64,
    pub length: f64,
    /// `(t, ‖u(t) − u_ref‖)` with the reference optimally translated.
    pub amp_series: Vec<(f64, f64)>,
    #[serde(skip)]
    pub initial: Option<Mat<f64>>,
    #[serde(skip)]
    pub final_state: Option<Mat<f64>>,
}

/// Root-mean-square over grid points and components.
pub fn rms(field: &Mat<f64>) -> f64 {
    let count = (field.nrows() * field.ncols()) as f64;
    let sum: f64 = (0..field.ncols()).flat_map(|i| (0..field.nrows()).map(move |r| (r, i))).map(|(r, i)| field[(r, i)].powi(2)).sum();
    (sum / count).sqrt()
}

/// Distance from `state` to the closest translate of `reference`, both
/// sampled on the same periodic grid; translates are evaluated spectrally.
pub fn translation_distance(state: &Mat<f64>, reference: &Mat<f64>) -> f64 {
    let (m, n) = (state.nrows(), state.ncols());
    let ref_hat: Vec<Vec<c64>> = (0..n)
        .map(|i| crate::spectral::forward(&(0..m).map(|r| reference[(r, i)]).collect::<Vec<_>>()))
        .collect();
    let u_hat: Vec<Vec<c64>> = (0..n)
        .map(|i| crate::spectral::forward(&(0..m).map(|r| state[(r, i)]).collect::<Vec<_>>()))
        .collect();
    // ‖u − ref(· + s)‖² = const − 2 Re Σ conj(û_k) ref̂_k e^{2πiks/m} (Parseval).
    let modes: Vec<(f64, c64)> = (0..m)
        .filter(|&j| !(m % 2 == 0 && j == m / 2))
        .map(|j| {
            let k = crate::spectral::mode_index(j, m) as f64;
            let w: c64 = (0..n).map(|i| u_hat[i][j].conj() * ref_hat[i][j]).sum();
            (k, w)
        })
        .collect();
    let overlap = |s: f64| -> f64 {
        modes.iter().map(|&(k, w)| (w * c64::from_polar(1.0, 2.0 * PI * k * s / m as f64)).re).sum()
    };
    let samples = 8 * m;
    let mut best = (0.0, f64::NEG_INFINITY);
    for j in 0..samples {
        let s = j as f64 * m as f64 / samples as f64;
        let v = overlap(s);
        if v > best.1 {
            best = (s, v);
        }
    }
    let (mut lo, mut hi) = (best.0 - m as f64 / samples as f64, best.0 + m as f64 / samples as f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if overlap(a) > overlap(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let s = 0.5 * (lo + hi);
    let power = |hat: &[Vec<c64>]| -> f64 {
        (0..m)
            .filter(|&j| !(m % 2 == 0 && j == m / 2))
            .map(|j| (0..n).map(|i| hat[i][j].norm_sqr()).sum::<f64>())
            .sum()
    };
    let d2 = power(&u_hat) + power(&ref_hat) - 2.0 * overlap(s);
    (d2.max(0.0) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Number of wave periods in the domain.
    pub periods: usize,
    /// Time step as a fraction of the wave period.
    pub dt_factor: f64,
    pub t_final: f64,
    pub records: usize,
    pub seed: u64,
    /// Highest perturbation wavenumber, in modes per domain.
    pub pert_modes: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { periods: 1, dt_factor: 1e-3, t_final: 200.0, records: 200, seed: 7, pert_modes: 4 }
    }
}

/// Smooth zero-mean random field with modes `1..=modes`, max-norm `amp`.
pub fn smooth_perturbation(m: usize, n: usize, modes: usize, amp: f64, seed: u64) -> Mat<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Vec<(f64, f64)>> = (0..n)
        .map(|_| (0..modes).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .collect();
    let field = Mat::from_fn(m, n, |r, i| {
        let x = 2.0 * PI * r as f64 / m as f64;
        coeffs[i]
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let kk = (k + 1) as f64;
                (a * (kk * x).cos() + b * (kk * x).sin()) / kk
            })
            .sum::<f64>()
    });
    let peak = linalg::max_abs(field.as_ref());
    Mat::from_fn(m, n, |r, i| amp * field[(r, i)] / peak)
}

fn tile(grid: &Mat<f64>, periods: usize) -> Mat<f64> {
    let m = grid.nrows();
    Mat::from_fn(m * periods, grid.ncols(), |r, i| grid[(r % m, i)])
}

/// Integrates `reference + perturbation` to `t_final`, recording the
/// translation-quotiented distance to `reference`.
#[allow(clippy::too_many_arguments)]
pub fn run_perturbation(
    spec: &SystemSpec,
    reference: &Mat<f64>,
    period: f64,
    speed: f64,
    eps: f64,
    perturbation: &Mat<f64>,
    opts: &EvolveOptions,
) -> Result<EvolutionRun> {
    let periods = opts.periods.max(1);
    let reference = tile(reference, periods);
    let length = period * periods as f64;
    if perturbation.nrows() != reference.nrows() || perturbation.ncols() != reference.ncols() {
        return Err(Error::DimensionMismatch("perturbation grid does not match the domain".into()));
    }
    let dt_target = opts.dt_factor * period;
    let steps = (opts.t_final / dt_target).ceil().max(1.0) as usize;
    let dt = opts.t_final / steps as f64;
    let stepper = Stepper::new(spec, eps, speed, length, reference.nrows(), dt)?;
    let initial = &reference + perturbation;
    let quotient = oscillation(&reference) > 1e-12;
    let distance = |u: &Mat<f64>| if quotient { translation_distance(u, &reference) } else { rms(&(u - &reference)) };

    let mut state = initial.clone();
    let record_every = (steps / opts.records.max(1)).max(1);
    let mut series = vec![(0.0, distance(&state))];
    for s in 1..=steps {
        state = stepper.step(&state);
        if s % record_every == 0 || s == steps {
            let t = s as f64 * dt;
            let d = distance(&state);
            if !d.is_finite() || d > BLOWUP_NORM {
                return Err(Error::Blowup { t });
            }
            series.push((t, d));
        }
    }
    Ok(EvolutionRun {
        dt,
        t_final: opts.t_final,
        length,
        amp_series: series,
        initial: Some(initial),
        final_state: Some(state),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Decay,
    Growth,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub outcome: Outcome,
    pub expected_stable: bool,
    pub agrees: bool,
    pub initial_norm: f64,
    pub final_norm: f64,
    /// Largest ratio of the perturbation norm to its initial value.
    pub max_ratio: f64,
    /// Least-squares slope of `log ‖·‖` over the recorded series.
    pub growth_rate: f64,
    pub run: EvolutionRun,
}

/// Least-squares slope of `log y` against `t`.
pub fn log_slope(series: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = series.iter().filter(|p| p.1 > 0.0).map(|&(t, y)| (t, y.ln())).collect();
    let n = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    num / den
}

fn judge(run: EvolutionRun, expected_stable: bool) -> ValidationReport {
    let initial_norm = run.amp_series[0].1;
    let final_norm = run.amp_series.last().map(|p| p.1).unwrap_or(initial_norm);
    let max_ratio = run.amp_series.iter().map(|p| p.1 / initial_norm).fold(0.0, f64::max);
    let outcome = if final_norm < 0.5 * initial_norm {
        Outcome::Decay
    } else if max_ratio > 10.0 {
        Outcome::Growth
    } else {
        Outcome::Inconclusive
    };
    let agrees = matches!((outcome, expected_stable), (Outcome::Decay, true) | (Outcome::Growth, false));
    ValidationReport {
        outcome,
        expected_stable,
        agrees,
        initial_norm,
        final_norm,
        max_ratio,
        growth_rate: log_slope(&run.amp_series),
        run,
    }
}

/// Perturbs a converged wave and checks the dynamics against the verdict.
/// One period tests co-periodic perturbations only; `opts.periods = k`
/// admits Floquet exponents `2πj/(kX)`.
pub fn validate_verdict(
    profile: &PeriodicProfile,
    spec: &SystemSpec,
    verdict: &StabilityVerdict,
    pert_amp: f64,
    opts: &EvolveOptions,
) -> Result<ValidationReport> {
    let amplitude = profile.amplitude();
    if pert_amp > 1e-3 * amplitude {
        return Err(Error::InvalidArgument(format!(
            "perturbation {pert_amp:e} exceeds 1e-3 of the wave amplitude {amplitude:e}"
        )));
    }
    let m = profile.grid.nrows() * opts.periods.max(1);
    let pert = smooth_perturbation(m, spec.n(), opts.pert_modes * opts.periods.max(1), pert_amp, opts.seed);
    let run = run_perturbation(spec, &profile.grid, profile.period, profile.speed, profile.eps, &pert, opts)?;
    Ok(judge(run, verdict.stable))
}

/// Perturbs the constant state `u ≡ 0` on a domain of `opts.periods` copies
/// of `period`, expected stable or not as given.
pub fn validate_constant_state(
    spec: &SystemSpec,
    eps: f64,
    speed: f64,
    period: f64,
    m: usize,
    pert_amp: f64,
    expected_stable: bool,
    opts: &EvolveOptions,
) -> Result<ValidationReport> {
    let grid = Mat::zeros(m, spec.n());
    let total = m * opts.periods.max(1);
    let pert = smooth_perturbation(total, spec.n(), opts.pert_modes * opts.periods.max(1), pert_amp, opts.seed);
    let run = run_perturbation(spec, &grid, period, speed, eps, &pert, opts)?;
    Ok(judge(run, expected_stable))
}
