//! Periodic traveling waves.
//!
//! A wave of speed `c` and period `X` solves the profile equation
//! `D u' + q = A(ε) u + N(u) − c u` on an `X`-periodic Fourier grid. With
//! `(c, X)` fixed and `q = 0`, the parameter `ε` is an unknown; a scalar
//! phase condition `w · f(u(0)) = 0`, `f(u) = D⁻¹(A(ε)u + N(u) − cu − q)`,
//! removes the translation freedom so Newton sees an isolated root.

use std::collections::VecDeque;
use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dispersion::TuringPoint;
use crate::error::{Error, Result};
use crate::linalg;
use crate::models::{Nonlinearity, SystemConfig, SystemSpec};
use crate::spectral;

pub const DEFAULT_GRID: usize = 64;

/// Consecutive failed entries from the seed after which a continuation stops.
const SEED_ENTRY_ATTEMPTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub period: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Oscillation (max-norm of `u − mean u`) below which a root is rejected as constant.
    pub trivial_tol: f64,
    pub phase_seed: u64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 25, trivial_tol: 1e-6, phase_seed: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuessOptions {
    /// Trial parameter offset whose square root sets the amplitude.
    pub eps_guess: f64,
    pub divisor: f64,
}

impl Default for GuessOptions {
    fn default() -> Self {
        Self { eps_guess: 1e-2, divisor: 10.0 }
    }
}

/// Starting point for Newton: grid values, parameter, and optionally the
/// phase vector of a previous solve so a continuation keeps one phase.
#[derive(Debug, Clone)]
pub struct ProfileGuess {
    pub grid: Mat<f64>,
    pub eps: f64,
    pub phase_w: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct PeriodicProfile {
    pub period: f64,
    pub speed: f64,
    pub eps: f64,
    pub q: Vec<f64>,
    /// `M × n`, row `m` holds `u(m X / M)`.
    pub grid: Mat<f64>,
    pub phase_w: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl PeriodicProfile {
    pub fn params(&self) -> WaveParams {
        WaveParams { period: self.period, speed: self.speed }
    }

    pub fn as_guess(&self) -> ProfileGuess {
        ProfileGuess { grid: self.grid.clone(), eps: self.eps, phase_w: Some(self.phase_w.clone()) }
    }

    /// Max-norm of the oscillatory part `u − mean u`.
    pub fn amplitude(&self) -> f64 {
        oscillation(&self.grid)
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        (0..self.grid.nrows()).map(|m| self.grid[(m, i)]).collect()
    }

    /// Grid shifted by `sites` collocation points.
    pub fn shifted_grid(&self, sites: usize) -> Mat<f64> {
        let m = self.grid.nrows();
        Mat::from_fn(m, self.grid.ncols(), |r, c| self.grid[((r + sites) % m, c)])
    }
}

pub fn oscillation(grid: &Mat<f64>) -> f64 {
    let m = grid.nrows();
    let mut out = 0.0f64;
    for i in 0..grid.ncols() {
        let mean = (0..m).map(|r| grid[(r, i)]).sum::<f64>() / m as f64;
        for r in 0..m {
            out = out.max((grid[(r, i)] - mean).abs());
        }
    }
    out
}

fn grid_derivative(grid: &Mat<f64>, period: f64) -> Mat<f64> {
    let (m, n) = (grid.nrows(), grid.ncols());
    let mut out = Mat::zeros(m, n);
    for i in 0..n {
        let col: Vec<f64> = (0..m).map(|r| grid[(r, i)]).collect();
        for (r, v) in spectral::derivative(&col, period).into_iter().enumerate() {
            out[(r, i)] = v;
        }
    }
    out
}

/// Mean over one period of each component of `g`.
pub fn grid_mean(grid: &Mat<f64>) -> Vec<f64> {
    let m = grid.nrows() as f64;
    (0..grid.ncols()).map(|i| (0..grid.nrows()).map(|r| grid[(r, i)]).sum::<f64>() / m).collect()
}

fn row(grid: &Mat<f64>, r: usize) -> Vec<f64> {
    (0..grid.ncols()).map(|i| grid[(r, i)]).collect()
}

/// `A(ε)u + N(u) − cu − q`, the right-hand side of `D u' = …`.
fn ode_rhs(spec: &SystemSpec, u: &[f64], eps: f64, speed: f64, q: &[f64]) -> Vec<f64> {
    let mut f = spec.evaluate_flux(u, eps);
    for i in 0..f.len() {
        f[i] -= speed * u[i] + q[i];
    }
    f
}

/// The first-order profile vector field `f(u) = D⁻¹(A(ε)u + N(u) − cu − q)`.
pub fn profile_vector_field(spec: &SystemSpec, u: &[f64], eps: f64, speed: f64, q: &[f64]) -> Result<Vec<f64>> {
    let d_inv = linalg::inverse(spec.d.as_ref())?;
    let rhs = ode_rhs(spec, u, eps, speed, q);
    let n = rhs.len();
    Ok((0..n).map(|i| (0..n).map(|j| d_inv[(i, j)] * rhs[j]).sum()).collect())
}

/// `R_m = D u'(x_m) + q − (A(ε)u_m + N(u_m) − c u_m)` with `u'` spectral.
pub fn profile_residual(
    spec: &SystemSpec,
    grid: &Mat<f64>,
    params: WaveParams,
    eps: f64,
    q: &[f64],
) -> Mat<f64> {
    let (m, n) = (grid.nrows(), grid.ncols());
    let du = grid_derivative(grid, params.period);
    let d_du = &du * spec.d.transpose();
    let mut out = Mat::zeros(m, n);
    for r in 0..m {
        let f = ode_rhs(spec, &row(grid, r), eps, params.speed, q);
        for i in 0..n {
            out[(r, i)] = d_du[(r, i)] - f[i];
        }
    }
    out
}

fn max_abs_mat(m: &Mat<f64>) -> f64 {
    linalg::max_abs(m.as_ref())
}

/// Random unit vector, reproducible from the seed.
pub fn phase_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    loop {
        let v: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Small-amplitude guess `√ε Re(e^{2πix/X} v) / divisor` built from the
/// eigenvector `v` of `D⁻¹(A(ε*) − c*I)` whose eigenvalue has positive
/// imaginary part.
pub fn initial_guess(
    turing: &TuringPoint,
    spec: &SystemSpec,
    m: usize,
    period: f64,
    opts: GuessOptions,
) -> Result<Mat<f64>> {
    let n = spec.n();
    let d_inv = linalg::inverse(spec.d.as_ref())?;
    let a = spec.evaluate_a(turing.eps_star);
    let shifted = Mat::from_fn(n, n, |i, j| a[(i, j)] - if i == j { turing.c_star } else { 0.0 });
    let (values, vectors) = linalg::eigenpairs_real((&d_inv * &shifted).as_ref())?;
    let (idx, _) = values
        .iter()
        .enumerate()
        .filter(|(_, z)| z.im > 1e-8)
        .max_by(|a, b| a.1.im.total_cmp(&b.1.im))
        .ok_or(Error::NoComplexPair)?;
    if !(period > 0.0) {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    let norm = (0..n).map(|i| vectors[(i, idx)].norm_sqr()).sum::<f64>().sqrt();
    let scale = opts.eps_guess.abs().sqrt() / opts.divisor / norm;
    Ok(Mat::from_fn(m, n, |r, i| {
        let theta = 2.0 * PI * r as f64 / m as f64;
        let phase = crate::c64::new(theta.cos(), theta.sin());
        scale * (phase * vectors[(i, idx)]).re
    }))
}

struct NewtonSystem<'a> {
    spec: &'a SystemSpec,
    params: WaveParams,
    q: &'a [f64],
    w_dinv: Vec<f64>,
    diff: Mat<f64>,
}

impl NewtonSystem<'_> {
    fn residual(&self, grid: &Mat<f64>, eps: f64) -> Vec<f64> {
        let (m, n) = (grid.nrows(), grid.ncols());
        let du = &self.diff * grid;
        let d_du = &du * self.spec.d.transpose();
        let mut out = Vec::with_capacity(m * n + 1);
        for r in 0..m {
            let f = ode_rhs(self.spec, &row(grid, r), eps, self.params.speed, self.q);
            for i in 0..n {
                out.push(d_du[(r, i)] - f[i]);
            }
        }
        let f0 = ode_rhs(self.spec, &row(grid, 0), eps, self.params.speed, self.q);
        out.push(self.w_dinv.iter().zip(&f0).map(|(a, b)| a * b).sum());
        out
    }

    fn jacobian(&self, grid: &Mat<f64>, eps: f64) -> Mat<f64> {
        let (m, n) = (grid.nrows(), grid.ncols());
        let size = m * n + 1;
        let d = &self.spec.d;
        let (sr, sc) = self.spec.eps_slot;
        let mut jac = Mat::zeros(size, size);
        for r in 0..m {
            for l in 0..m {
                let dm = self.diff[(r, l)];
                if dm == 0.0 {
                    continue;
                }
                for i in 0..n {
                    for k in 0..n {
                        jac[(r * n + i, l * n + k)] = d[(i, k)] * dm;
                    }
                }
            }
            let mut b = self.spec.evaluate_flux_jacobian(&row(grid, r), eps);
            for i in 0..n {
                b[(i, i)] -= self.params.speed;
            }
            for i in 0..n {
                for k in 0..n {
                    jac[(r * n + i, r * n + k)] -= b[(i, k)];
                }
            }
            jac[(r * n + sr, size - 1)] = -grid[(r, sc)];
            if r == 0 {
                for k in 0..n {
                    jac[(size - 1, k)] = (0..n).map(|i| self.w_dinv[i] * b[(i, k)]).sum();
                }
                jac[(size - 1, size - 1)] = self.w_dinv[sr] * grid[(0, sc)];
            }
        }
        jac
    }
}

/// Residual and analytic Jacobian of the bordered Newton system in the
/// unknowns `(u_grid, ε)`, row-major by grid point, `ε` last.
pub fn bordered_system(
    spec: &SystemSpec,
    grid: &Mat<f64>,
    params: WaveParams,
    eps: f64,
    w: &[f64],
) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = spec.n();
    if grid.ncols() != n || w.len() != n {
        return Err(Error::DimensionMismatch("grid or phase vector does not match the system".into()));
    }
    let q = vec![0.0; n];
    let d_inv = linalg::inverse(spec.d.as_ref())?;
    let system = NewtonSystem {
        spec,
        params,
        q: &q,
        w_dinv: (0..n).map(|j| (0..n).map(|i| w[i] * d_inv[(i, j)]).sum()).collect(),
        diff: spectral::differentiation_matrix(grid.nrows(), params.period),
    };
    Ok((system.residual(grid, eps), system.jacobian(grid, eps)))
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn newton(
    spec: &SystemSpec,
    guess: &ProfileGuess,
    params: WaveParams,
    w: &[f64],
    opts: NewtonOptions,
) -> Result<PeriodicProfile> {
    let (m, n) = (guess.grid.nrows(), guess.grid.ncols());
    let q = vec![0.0; n];
    let d_inv = linalg::inverse(spec.d.as_ref())?;
    let w_dinv: Vec<f64> = (0..n).map(|j| (0..n).map(|i| w[i] * d_inv[(i, j)]).sum()).collect();
    let system = NewtonSystem {
        spec,
        params,
        q: &q,
        w_dinv,
        diff: spectral::differentiation_matrix(m, params.period),
    };

    let mut grid = guess.grid.clone();
    let mut eps = guess.eps;
    let mut res = system.residual(&grid, eps);
    let mut norm = max_norm(&res);
    let mut iterations = 0;
    while norm > opts.tol {
        if iterations >= opts.max_iter || !norm.is_finite() {
            return Err(Error::NewtonDivergence { iterations, residual: norm });
        }
        iterations += 1;
        let jac = system.jacobian(&grid, eps);
        let lu = jac.partial_piv_lu();
        let u = lu.U();
        let (lo, hi) = (0..u.nrows()).fold((f64::INFINITY, 0.0f64), |(lo, hi), i| {
            (lo.min(u[(i, i)].abs()), hi.max(u[(i, i)].abs()))
        });
        if !(lo > 1e-14 * hi) {
            return Err(Error::SingularJacobian);
        }
        let rhs = Mat::from_fn(res.len(), 1, |i, _| -res[i]);
        let step = lu.solve(&rhs);

        // Backtrack on the max-norm residual; take the shortest step if none decrease it.
        let mut t = 1.0;
        loop {
            let trial_grid = Mat::from_fn(m, n, |r, i| grid[(r, i)] + t * step[(r * n + i, 0)]);
            let trial_eps = eps + t * step[(m * n, 0)];
            let trial_res = system.residual(&trial_grid, trial_eps);
            let trial_norm = max_norm(&trial_res);
            if trial_norm < norm || t < 1.0 / 32.0 {
                grid = trial_grid;
                eps = trial_eps;
                res = trial_res;
                norm = trial_norm;
                break;
            }
            t *= 0.5;
        }
    }

    let osc = oscillation(&grid);
    if osc < opts.trivial_tol {
        return Err(Error::TrivialSolution { oscillation: osc });
    }
    Ok(PeriodicProfile {
        period: params.period,
        speed: params.speed,
        eps,
        q,
        grid,
        phase_w: w.to_vec(),
        residual_norm: norm,
        iterations,
    })
}

/// Newton on `(u_grid, ε)` with `(c, X)` and `q = 0` fixed.
///
/// A singular Jacobian is taken as a degenerate phase vector: `w` is redrawn
/// once from the next seed and the solve retried.
pub fn solve_profile(
    spec: &SystemSpec,
    guess: &ProfileGuess,
    params: WaveParams,
    opts: NewtonOptions,
) -> Result<PeriodicProfile> {
    let n = spec.n();
    if guess.grid.ncols() != n {
        return Err(Error::DimensionMismatch(format!("guess has {} components, system {n}", guess.grid.ncols())));
    }
    let m = guess.grid.nrows();
    if m % 2 != 0 || m < 16 {
        return Err(Error::InvalidArgument(format!("grid size {m} must be even and at least 16")));
    }
    if !(params.period > 0.0) {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    let w = guess.phase_w.clone().unwrap_or_else(|| phase_vector(n, opts.phase_seed));
    match newton(spec, guess, params, &w, opts) {
        Err(Error::SingularJacobian) => {
            let redrawn = phase_vector(n, opts.phase_seed.wrapping_add(1));
            newton(spec, guess, params, &redrawn, opts)
        }
        other => other,
    }
}

/// Solve from a guess at `from`, walking to `to` in `substeps` equal
/// parameter increments; each increment warm-starts from the last.
pub fn solve_along(
    spec: &SystemSpec,
    guess: &ProfileGuess,
    from: WaveParams,
    to: WaveParams,
    substeps: usize,
    opts: NewtonOptions,
) -> Result<PeriodicProfile> {
    let mut current = guess.clone();
    let mut last = None;
    for k in 1..=substeps.max(1) {
        let t = k as f64 / substeps.max(1) as f64;
        let params = WaveParams {
            period: from.period + t * (to.period - from.period),
            speed: from.speed + t * (to.speed - from.speed),
        };
        let profile = solve_profile(spec, &current, params, opts)?;
        current = profile.as_guess();
        last = Some(profile);
    }
    Ok(last.expect("at least one substep"))
}

fn solve_with_refinement(
    spec: &SystemSpec,
    guess: &ProfileGuess,
    from: WaveParams,
    to: WaveParams,
    opts: NewtonOptions,
) -> Result<PeriodicProfile> {
    let mut last_err = None;
    for substeps in [1, 4, 16] {
        match solve_along(spec, guess, from, to, substeps, opts) {
            Ok(p) => return Ok(p),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("tried at least once"))
}

/// Profiles over a rectangular `(c, X)` grid, stored row-major by speed.
#[derive(Debug, Clone)]
pub struct ContinuationFamily {
    pub speeds: Vec<f64>,
    pub periods: Vec<f64>,
    pub members: Vec<Option<PeriodicProfile>>,
    pub provenance: Option<TuringPoint>,
}

impl ContinuationFamily {
    pub fn get(&self, ic: usize, ix: usize) -> Option<&PeriodicProfile> {
        self.members[ic * self.periods.len() + ix].as_ref()
    }

    pub fn converged(&self) -> usize {
        self.members.iter().filter(|m| m.is_some()).count()
    }
}

/// Natural-parameter continuation over `speeds × periods` from a converged seed.
///
/// Points are visited breadth-first from the grid point nearest the seed;
/// each is warm-started from a converged neighbour (with substepping when a
/// direct jump fails). Points that never converge stay `None`.
pub fn continue_family(
    spec: &SystemSpec,
    seed: &PeriodicProfile,
    speeds: &[f64],
    periods: &[f64],
    opts: NewtonOptions,
) -> Result<ContinuationFamily> {
    if seed.residual_norm > 1e-8 || !seed.residual_norm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "seed profile is not converged (residual {:.3e})",
            seed.residual_norm
        )));
    }
    if speeds.is_empty() || periods.is_empty() {
        return Err(Error::InvalidArgument("empty continuation range".into()));
    }
    let (nc, nx) = (speeds.len(), periods.len());
    let span = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo).max(1e-12)
    };
    let (sc, sx) = (span(speeds), span(periods));
    let dist = |k: usize| ((speeds[k / nx] - seed.speed) / sc).powi(2) + ((periods[k % nx] - seed.period) / sx).powi(2);
    let mut by_distance: Vec<usize> = (0..nc * nx).collect();
    by_distance.sort_by(|&a, &b| dist(a).total_cmp(&dist(b)));

    let mut members: Vec<Option<PeriodicProfile>> = vec![None; nc * nx];
    let mut attempts = vec![0u8; nc * nx];
    let params_of = |k: usize| WaveParams { speed: speeds[k / nx], period: periods[k % nx] };

    // Enter the grid at the nearest point reachable from the seed, then
    // grow breadth-first. Unreached points get further entries from the seed.
    let mut seed_failures = 0;
    for &start in &by_distance {
        if members[start].is_some() || attempts[start] > 0 {
            continue;
        }
        if seed_failures >= SEED_ENTRY_ATTEMPTS {
            break;
        }
        attempts[start] += 1;
        let Ok(p) = solve_with_refinement(spec, &seed.as_guess(), seed.params(), params_of(start), opts) else {
            seed_failures += 1;
            continue;
        };
        seed_failures = 0;
        members[start] = Some(p);
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            let (ic, ix) = (k / nx, k % nx);
            let mut neighbours = Vec::with_capacity(4);
            if ic > 0 {
                neighbours.push(k - nx);
            }
            if ic + 1 < nc {
                neighbours.push(k + nx);
            }
            if ix > 0 {
                neighbours.push(k - 1);
            }
            if ix + 1 < nx {
                neighbours.push(k + 1);
            }
            for j in neighbours {
                if members[j].is_some() || attempts[j] >= 2 {
                    continue;
                }
                attempts[j] += 1;
                let from = members[k].as_ref().expect("queued points are converged");
                if let Ok(p) = solve_with_refinement(spec, &from.as_guess(), from.params(), params_of(j), opts) {
                    members[j] = Some(p);
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(ContinuationFamily { speeds: speeds.to_vec(), periods: periods.to_vec(), members, provenance: None })
}

/// Deforms a converged quadratic-nonlinearity wave into a cubic one through
/// `N = β(h u₁³ + (1 − h) u₁²)`, re-solving at `h = 1/steps, 2/steps, …, 1`.
pub fn homotopy_to_cubic(
    spec: &SystemSpec,
    seed: &PeriodicProfile,
    h_steps: usize,
    opts: NewtonOptions,
) -> Result<(SystemSpec, PeriodicProfile)> {
    let steps = h_steps.max(1);
    let mut current = seed.clone();
    for k in 1..=steps {
        let h = k as f64 / steps as f64;
        let stage = spec.with_nonlinearity(Nonlinearity::homotopy(h), spec.beta);
        current = solve_profile(&stage, &current.as_guess(), current.params(), opts)
            .map_err(|e| Error::Homotopy { h, source: Box::new(e) })?;
    }
    let mut cubic = spec.with_nonlinearity(Nonlinearity::CUBIC, spec.beta);
    cubic.label = "cubic".into();
    let profile = solve_profile(&cubic, &current.as_guess(), current.params(), opts)?;
    Ok((cubic, profile))
}

/// Seed for the opposite criticality: `(β, c − c*, ε) → (−β, −(c − c*), −ε)`,
/// keeping the grid. Returns the guess and the mirrored wave parameters.
pub fn mirror_guess(profile: &PeriodicProfile, c_star: f64) -> (ProfileGuess, WaveParams) {
    let c0 = profile.speed - c_star;
    (
        ProfileGuess { grid: profile.grid.clone(), eps: -profile.eps, phase_w: Some(profile.phase_w.clone()) },
        WaveParams { period: profile.period, speed: c_star - c0 },
    )
}

/// Walks a converged profile to new parameters in steps no longer than
/// `max_step` (in both `c` and `X`), substepping where Newton fails.
pub fn march(
    spec: &SystemSpec,
    from: &PeriodicProfile,
    to: WaveParams,
    max_step: f64,
    opts: NewtonOptions,
) -> Result<PeriodicProfile> {
    let span = (to.speed - from.speed).abs().max((to.period - from.period).abs());
    let steps = (span / max_step).ceil().max(1.0) as usize;
    let start = from.params();
    let mut current = from.clone();
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let next = WaveParams {
            period: start.period + t * (to.period - start.period),
            speed: start.speed + t * (to.speed - start.speed),
        };
        current = solve_with_refinement(spec, &current.as_guess(), current.params(), next, opts)?;
    }
    Ok(current)
}

/// How a first wave is obtained for a system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeedRoute {
    /// Newton from the small-amplitude guess near onset, then continuation.
    Direct,
    /// Solve the quadratic analogue, continue it to the target, and deform
    /// the nonlinearity to cubic there.
    Homotopy { h_steps: usize },
    /// Build the cubic wave for `−β` near onset, apply the sign map
    /// `(β, c − c*, ε) → (−β, −(c − c*), −ε)`, then continue.
    Mirror { h_steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeedPlan {
    pub route: SeedRoute,
    /// Shifted speed `c − c*` of the first solve.
    pub onset_c0: f64,
    /// Period of the first solve as a multiple of `X*`.
    pub onset_period_factor: f64,
    pub guess: GuessOptions,
    pub max_step: f64,
}

impl Default for SeedPlan {
    fn default() -> Self {
        Self {
            route: SeedRoute::Direct,
            onset_c0: 4.06e-3,
            onset_period_factor: 1.002,
            guess: GuessOptions::default(),
            max_step: 2e-3,
        }
    }
}

impl SeedPlan {
    pub fn onset(&self, turing: &TuringPoint) -> WaveParams {
        WaveParams { speed: turing.c_star + self.onset_c0, period: turing.x_star * self.onset_period_factor }
    }
}

fn solve_near_onset(
    spec: &SystemSpec,
    turing: &TuringPoint,
    plan: &SeedPlan,
    m: usize,
    opts: NewtonOptions,
) -> Result<PeriodicProfile> {
    let onset = plan.onset(turing);
    let grid = initial_guess(turing, spec, m, onset.period, plan.guess)?;
    let guess = ProfileGuess { grid, eps: turing.eps_star + plan.guess.eps_guess, phase_w: None };
    solve_profile(spec, &guess, onset, opts)
}

fn require_cubic(spec: &SystemSpec) -> Result<()> {
    if spec.nonlinearity.kind != crate::models::NonlinearityKind::Cubic {
        return Err(Error::InvalidArgument("homotopy and mirror routes need a cubic nonlinearity".into()));
    }
    Ok(())
}

/// A converged wave of `spec` at `target`, built along `plan.route`.
pub fn seed_profile(
    spec: &SystemSpec,
    turing: &TuringPoint,
    target: WaveParams,
    plan: &SeedPlan,
    m: usize,
    opts: NewtonOptions,
) -> Result<PeriodicProfile> {
    match plan.route {
        SeedRoute::Direct => {
            let first = solve_near_onset(spec, turing, plan, m, opts)?;
            march(spec, &first, target, plan.max_step, opts)
        }
        SeedRoute::Homotopy { h_steps } => {
            require_cubic(spec)?;
            let quadratic = spec.with_nonlinearity(Nonlinearity::QUADRATIC, spec.beta);
            let first = solve_near_onset(&quadratic, turing, plan, m, opts)?;
            let there = march(&quadratic, &first, target, plan.max_step, opts)?;
            let (_, cubic) = homotopy_to_cubic(&quadratic, &there, h_steps, opts)?;
            solve_profile(spec, &cubic.as_guess(), target, opts)
        }
        SeedRoute::Mirror { h_steps } => {
            require_cubic(spec)?;
            let opposite = spec.with_nonlinearity(Nonlinearity::QUADRATIC, -spec.beta);
            let first = solve_near_onset(&opposite, turing, plan, m, opts)?;
            let (_, cubic) = homotopy_to_cubic(&opposite, &first, h_steps, opts)?;
            let (guess, params) = mirror_guess(&cubic, turing.c_star);
            let mirrored = solve_profile(spec, &guess, params, opts)?;
            march(spec, &mirrored, target, plan.max_step, opts)
        }
    }
}

/// Self-describing on-disk form of a profile together with its system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub system: SystemConfig,
    pub period: f64,
    pub speed: f64,
    #[serde(default)]
    pub c_star: Option<f64>,
    pub eps: f64,
    pub q: Vec<f64>,
    pub phase_w: Vec<f64>,
    pub residual_norm: f64,
    /// Row `m` holds `u(m X / M)`.
    pub grid: Vec<Vec<f64>>,
}

impl ProfileRecord {
    pub fn new(spec: &SystemSpec, profile: &PeriodicProfile, c_star: Option<f64>) -> Self {
        Self {
            system: spec.to_config(),
            period: profile.period,
            speed: profile.speed,
            c_star,
            eps: profile.eps,
            q: profile.q.clone(),
            phase_w: profile.phase_w.clone(),
            residual_norm: profile.residual_norm,
            grid: (0..profile.grid.nrows()).map(|r| row(&profile.grid, r)).collect(),
        }
    }

    /// Rebuilds the system and profile, recomputing the residual from the
    /// stored values.
    pub fn restore(&self) -> Result<(SystemSpec, PeriodicProfile)> {
        let spec = self.system.clone().into_spec()?;
        let n = spec.n();
        if self.grid.is_empty() || self.grid.iter().any(|r| r.len() != n) || self.q.len() != n {
            return Err(Error::DimensionMismatch("profile record does not match its system".into()));
        }
        if self.grid.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("profile grid"));
        }
        let grid = Mat::from_fn(self.grid.len(), n, |r, i| self.grid[r][i]);
        let params = WaveParams { period: self.period, speed: self.speed };
        let residual = max_abs_mat(&profile_residual(&spec, &grid, params, self.eps, &self.q));
        Ok((
            spec,
            PeriodicProfile {
                period: self.period,
                speed: self.speed,
                eps: self.eps,
                q: self.q.clone(),
                grid,
                phase_w: self.phase_w.clone(),
                residual_norm: residual,
                iterations: 0,
            },
        ))
    }
}
