//! Floquet-Bloch spectra of periodic waves by Hill's method.
//!
//! The linearization about a wave in its co-moving frame is
//! `v_t = L v = D v'' − (B(x) v)'`, `B = A(ε) − cI + dN(u(x))`. Writing
//! `v = e^{iξx} Σ_l v̂_l e^{2πilx/X}` with `ξ ∈ [−π/X, π/X]` and truncating to
//! `|l| ≤ N` gives one dense eigenproblem per Floquet exponent.

use std::f64::consts::PI;

use faer::Mat;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::error::{Error, Result};
use crate::linalg;
use crate::models::SystemSpec;
use crate::profile::PeriodicProfile;
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HillSettings {
    pub n_floquet: usize,
    /// Fourier modes per field, `2N + 1`.
    pub modes: usize,
    /// Radius of the origin ball separating the neutral curves from the rest.
    pub r0: f64,
    pub tol_stab: f64,
    pub tol_hyp: f64,
    pub tol_curv: f64,
    /// `|λ(0)|` below which a branch counts as passing through the origin.
    pub origin_tol: f64,
    /// Upper bound on the Whitham fit radius in `ξ`.
    pub fit_radius: f64,
    /// Number of halvings of the fit radius sampled for the Whitham fit.
    pub fit_levels: usize,
}

impl Default for HillSettings {
    fn default() -> Self {
        Self {
            n_floquet: 101,
            modes: 41,
            r0: 1e-2,
            tol_stab: 1e-6,
            tol_hyp: 1e-4,
            tol_curv: 1e-6,
            origin_tol: 1e-6,
            fit_radius: 2e-2,
            fit_levels: 14,
        }
    }
}

impl HillSettings {
    pub fn with_modes(self, modes: usize) -> Self {
        Self { modes, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.modes % 2 == 0 || self.modes < 3 {
            return Err(Error::InvalidArgument(format!("mode count {} must be odd and at least 3", self.modes)));
        }
        if self.n_floquet % 2 == 0 {
            return Err(Error::InvalidArgument(format!("Floquet count {} must be odd", self.n_floquet)));
        }
        if self.fit_levels < 4 || !(self.fit_radius > 0.0) {
            return Err(Error::InvalidArgument("Whitham fit needs a positive radius and at least 4 levels".into()));
        }
        Ok(())
    }
}

/// Fourier data of the coefficient functions of `L = f₂ ∂² + f₁(x) ∂ + f₀(x)`.
#[derive(Debug, Clone)]
pub struct BlochOperator {
    pub period: f64,
    pub speed: f64,
    pub eps: f64,
    pub n: usize,
    pub second: Mat<f64>,
    /// `f̂₁,k` for `k = −K..K`, stored at index `k + K`.
    pub first: Vec<Mat<c64>>,
    pub zeroth: Vec<Mat<c64>>,
}

impl BlochOperator {
    /// Largest Fourier index carried by the coefficient data.
    pub fn bandwidth(&self) -> usize {
        (self.first.len() - 1) / 2
    }

    pub fn first_coefficient(&self, k: i64) -> Option<&Mat<c64>> {
        self.coefficient(&self.first, k)
    }

    pub fn zeroth_coefficient(&self, k: i64) -> Option<&Mat<c64>> {
        self.coefficient(&self.zeroth, k)
    }

    fn coefficient<'a>(&self, data: &'a [Mat<c64>], k: i64) -> Option<&'a Mat<c64>> {
        let kk = self.bandwidth() as i64;
        (k.abs() <= kk).then(|| &data[(k + kk) as usize])
    }

    /// Brillouin zone half-width `π/X`.
    pub fn zone(&self) -> f64 {
        PI / self.period
    }
}

/// Linearization about grid values `u(x_m)` of a wave with the given
/// parameters. A zero grid gives the constant-state operator.
pub fn linearize_state(spec: &SystemSpec, grid: &Mat<f64>, period: f64, speed: f64, eps: f64) -> BlochOperator {
    let (m, n) = (grid.nrows(), grid.ncols());
    let samples: Vec<Mat<f64>> = (0..m)
        .map(|r| {
            let u: Vec<f64> = (0..n).map(|i| grid[(r, i)]).collect();
            let mut b = spec.evaluate_flux_jacobian(&u, eps);
            for i in 0..n {
                b[(i, i)] -= speed;
            }
            b
        })
        .collect();
    let kk = (m - 1) / 2;
    let mut first = vec![Mat::<c64>::zeros(n, n); 2 * kk + 1];
    let mut zeroth = vec![Mat::<c64>::zeros(n, n); 2 * kk + 1];
    for i in 0..n {
        for j in 0..n {
            let series: Vec<f64> = samples.iter().map(|b| b[(i, j)]).collect();
            let hat = spectral::forward(&series);
            for (bin, z) in hat.iter().enumerate() {
                let k = spectral::mode_index(bin, m);
                if k.unsigned_abs() as usize > kk {
                    continue;
                }
                let slot = (k + kk as i64) as usize;
                first[slot][(i, j)] = -z;
                zeroth[slot][(i, j)] = -z * c64::new(0.0, 2.0 * PI * k as f64 / period);
            }
        }
    }
    BlochOperator { period, speed, eps, n, second: spec.d.clone(), first, zeroth }
}

pub fn linearize_about(profile: &PeriodicProfile, spec: &SystemSpec) -> BlochOperator {
    linearize_state(spec, &profile.grid, profile.period, profile.speed, profile.eps)
}

/// Hill matrix at Floquet exponent `xi`, `modes = 2N + 1` per field.
/// Block `(j, l)` is `Σ_q f̂_{q, j−l} (i(ξ + 2πl/X))^q`.
pub fn build_hill_matrix(op: &BlochOperator, xi: f64, modes: usize) -> Mat<c64> {
    let n = op.n;
    let half = (modes / 2) as i64;
    let mut h = Mat::<c64>::zeros(n * modes, n * modes);
    for lj in 0..modes {
        let j = lj as i64 - half;
        for ll in 0..modes {
            let l = ll as i64 - half;
            let (Some(f1), Some(f0)) = (op.first_coefficient(j - l), op.zeroth_coefficient(j - l)) else {
                continue;
            };
            let mu = c64::new(0.0, xi + 2.0 * PI * l as f64 / op.period);
            for a in 0..n {
                for b in 0..n {
                    let mut v = f1[(a, b)] * mu + f0[(a, b)];
                    if j == l {
                        v += mu * mu * op.second[(a, b)];
                    }
                    h[(lj * n + a, ll * n + b)] = v;
                }
            }
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub xi: f64,
    pub eigenvalues: Vec<c64>,
}

/// Equispaced exponents across `[−π/X, π/X]`; odd counts include `ξ = 0`.
pub fn floquet_grid(period: f64, n_floquet: usize) -> Vec<f64> {
    if n_floquet <= 1 {
        return vec![0.0];
    }
    let zone = PI / period;
    let half = (n_floquet / 2) as f64;
    (0..n_floquet).map(|k| zone * (k as f64 - half) / half).collect()
}

pub fn spectrum_at(op: &BlochOperator, xis: &[f64], modes: usize) -> Result<Vec<SpectrumSample>> {
    let solve = |&xi: &f64| -> Result<SpectrumSample> {
        let h = build_hill_matrix(op, xi, modes);
        Ok(SpectrumSample { xi, eigenvalues: linalg::eigenvalues_complex(h.as_ref())? })
    };
    #[cfg(feature = "parallel")]
    let out = xis.par_iter().map(solve).collect();
    #[cfg(not(feature = "parallel"))]
    let out = xis.iter().map(solve).collect();
    out
}

pub fn compute_spectrum(op: &BlochOperator, n_floquet: usize, modes: usize) -> Result<Vec<SpectrumSample>> {
    if n_floquet % 2 == 0 {
        return Err(Error::InvalidArgument(format!("Floquet count {n_floquet} must be odd")));
    }
    spectrum_at(op, &floquet_grid(op.period, n_floquet), modes)
}

/// `λ_j(ξ) ≈ −i a ξ − b ξ²` for one branch through (or near) the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhithamCurve {
    pub a: c64,
    pub b: c64,
    pub lambda0: c64,
    /// Largest misfit of the quadratic model over the fitted samples.
    pub misfit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhithamFit {
    pub curves: Vec<WhithamCurve>,
    pub fit_radius: f64,
    /// Eigenvalue nearest the origin at `ξ = 0` among the non-neutral branches.
    pub fifth_curve: Option<c64>,
    /// Relative change of the fit when its radius is halved.
    pub plateau_spread: Option<f64>,
}

fn greedy_match(predicted: &[c64], candidates: &[c64]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(predicted.len() * candidates.len());
    for (p, z) in predicted.iter().enumerate() {
        for (c, w) in candidates.iter().enumerate() {
            pairs.push(((z - w).norm(), p, c));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut assigned = vec![usize::MAX; predicted.len()];
    let mut taken = vec![false; candidates.len()];
    let mut left = predicted.len();
    for (_, p, c) in pairs {
        if left == 0 {
            break;
        }
        if assigned[p] == usize::MAX && !taken[c] {
            assigned[p] = c;
            taken[c] = true;
            left -= 1;
        }
    }
    assigned
}

/// Branches through the origin at `ξ = 0` followed outward along one side.
/// `side` holds samples ordered by increasing `|ξ|`, excluding `ξ = 0`;
/// predictions extrapolate linearly in `ξ` from the last two points.
fn track_side(start: &[c64], side: &[&SpectrumSample], first_guess: &[c64]) -> Vec<Vec<c64>> {
    let k = start.len();
    let mut paths: Vec<Vec<c64>> = start.iter().map(|&z| vec![z]).collect();
    let mut xs = vec![0.0];
    for (step, sample) in side.iter().enumerate() {
        let predicted: Vec<c64> = (0..k)
            .map(|j| {
                let p = &paths[j];
                if step == 0 {
                    first_guess[j]
                } else {
                    let (x0, x1) = (xs[xs.len() - 2], xs[xs.len() - 1]);
                    let slope = (p[p.len() - 1] - p[p.len() - 2]) / (x1 - x0);
                    p[p.len() - 1] + slope * (sample.xi - x1)
                }
            })
            .collect();
        let picks = greedy_match(&predicted, &sample.eigenvalues);
        for j in 0..k {
            paths[j].push(sample.eigenvalues[picks[j]]);
        }
        xs.push(sample.xi);
    }
    paths
}

fn least_squares_quadratic(xis: &[f64], values: &[c64], lambda0: c64) -> (c64, c64, f64) {
    // λ − λ(0) = p ξ + r ξ², with p = −ia and r = −b.
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    let (mut t1, mut t2) = (c64::new(0.0, 0.0), c64::new(0.0, 0.0));
    for (&x, &z) in xis.iter().zip(values) {
        let y = z - lambda0;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
        t1 += y * x;
        t2 += y * x * x;
    }
    let det = s2 * s4 - s3 * s3;
    let p = (t1 * s4 - t2 * s3) / det;
    let r = (t2 * s2 - t1 * s3) / det;
    let misfit = xis
        .iter()
        .zip(values)
        .map(|(&x, &z)| (z - lambda0 - p * x - r * x * x).norm())
        .fold(0.0, f64::max);
    (p * c64::new(0.0, 1.0), -r, misfit)
}

/// Neutral branches followed through a set of samples containing `ξ = 0`.
#[derive(Debug, Clone)]
pub struct TrackedBranches {
    pub xis: Vec<f64>,
    /// `values[j][s]` is branch `j` at `xis[s]`.
    pub values: Vec<Vec<c64>>,
    pub fifth_curve: Option<c64>,
}

/// Follows every eigenvalue within `origin_tol` of the origin at `ξ = 0`
/// outward on both sides by nearest continuation.
pub fn track_neutral_branches(samples: &[SpectrumSample], origin_tol: f64) -> Result<TrackedBranches> {
    let center = samples
        .iter()
        .find(|s| s.xi == 0.0)
        .ok_or_else(|| Error::Tracking("samples do not include xi = 0".into()))?;
    let mut by_size: Vec<c64> = center.eigenvalues.clone();
    by_size.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let neutral: Vec<c64> = by_size.iter().copied().take_while(|z| z.norm() <= origin_tol).collect();
    let fifth_curve = by_size.get(neutral.len()).copied();
    if neutral.len() < 2 {
        return Err(Error::Tracking(format!(
            "only {} eigenvalues within {origin_tol:e} of the origin at xi = 0",
            neutral.len()
        )));
    }

    let mut pos: Vec<&SpectrumSample> = samples.iter().filter(|s| s.xi > 0.0).collect();
    let mut neg: Vec<&SpectrumSample> = samples.iter().filter(|s| s.xi < 0.0).collect();
    pos.sort_by(|a, b| a.xi.total_cmp(&b.xi));
    neg.sort_by(|a, b| b.xi.total_cmp(&a.xi));
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Tracking("need samples on both sides of xi = 0".into()));
    }

    // Nearest the origin at the first positive exponent are the neutral eigenvalues.
    let mut first: Vec<c64> = pos[0].eigenvalues.clone();
    first.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let pos_paths = track_side(&neutral, &pos, &first[..neutral.len()]);
    // Across ξ = 0 each branch is odd to first order in ξ.
    let ratio = neg[0].xi / pos[0].xi;
    let mirrored: Vec<c64> = pos_paths.iter().map(|p| p[0] + (p[1] - p[0]) * ratio).collect();
    let neg_paths = track_side(&neutral, &neg, &mirrored);

    let mut xis: Vec<f64> = neg.iter().rev().map(|s| s.xi).collect();
    xis.push(0.0);
    xis.extend(pos.iter().map(|s| s.xi));
    let values = (0..neutral.len())
        .map(|j| {
            let mut v: Vec<c64> = neg_paths[j][1..].iter().rev().copied().collect();
            v.push(neutral[j]);
            v.extend(pos_paths[j][1..].iter().copied());
            v
        })
        .collect();
    Ok(TrackedBranches { xis, values, fifth_curve })
}

fn fit_tracked(tracked: &TrackedBranches, keep: impl Fn(f64) -> bool) -> Vec<WhithamCurve> {
    let zero = tracked.xis.iter().position(|&x| x == 0.0).expect("tracked samples contain xi = 0");
    let mut curves: Vec<WhithamCurve> = tracked
        .values
        .iter()
        .map(|branch| {
            let (xs, vs): (Vec<f64>, Vec<c64>) = tracked
                .xis
                .iter()
                .zip(branch)
                .filter(|(&x, _)| x == 0.0 || keep(x.abs()))
                .map(|(&x, &z)| (x, z))
                .unzip();
            let (a, b, misfit) = least_squares_quadratic(&xs, &vs, branch[zero]);
            WhithamCurve { a, b, lambda0: branch[zero], misfit }
        })
        .collect();
    curves.sort_by(|x, y| x.a.re.total_cmp(&y.a.re));
    curves
}

/// Fits `λ_j(ξ) = −i a_j ξ − b_j ξ²` to the branches passing within
/// `origin_tol` of the origin at `ξ = 0`, using samples with `|ξ| ≤ fit_radius`.
pub fn fit_whitham_curves(samples: &[SpectrumSample], fit_radius: f64, origin_tol: f64) -> Result<WhithamFit> {
    let inside: Vec<SpectrumSample> = samples.iter().filter(|s| s.xi.abs() <= fit_radius).cloned().collect();
    let tracked = track_neutral_branches(&inside, origin_tol)?;
    if tracked.xis.len() < 5 {
        return Err(Error::Tracking("need at least two samples on each side of xi = 0".into()));
    }
    Ok(WhithamFit {
        curves: fit_tracked(&tracked, |_| true),
        fit_radius,
        fifth_curve: tracked.fifth_curve,
        plateau_spread: None,
    })
}

/// Geometric exponents `0, ±R 2^{−k}` for `k = 0..levels`.
pub fn geometric_exponents(radius: f64, levels: usize) -> Vec<f64> {
    let mut xis = vec![0.0];
    for k in 0..levels {
        let x = radius * 0.5f64.powi(k as i32);
        xis.push(x);
        xis.push(-x);
    }
    xis.sort_by(f64::total_cmp);
    xis
}

/// Whitham fit at a radius chosen from the data.
///
/// Branches are tracked over geometrically spaced exponents. Each radius
/// `R_k = R 2^{−k}` gets its own fit from the three levels `R_k, R_k/2, R_k/4`;
/// the reported fit is the one that changes least when the radius is halved.
/// Large radii are spoiled by nearby non-neutral spectrum, very small ones by
/// the splitting of the multiple eigenvalue at the origin.
pub fn whitham_fit(op: &BlochOperator, settings: &HillSettings) -> Result<WhithamFit> {
    let radius = settings.fit_radius.min(op.zone());
    let levels = settings.fit_levels;
    let samples = spectrum_at(op, &geometric_exponents(radius, levels), settings.modes)?;
    let tracked = track_neutral_branches(&samples, settings.origin_tol)?;

    let fits: Vec<Vec<WhithamCurve>> = (0..levels - 2)
        .map(|k| {
            let hi = radius * 0.5f64.powi(k as i32) * (1.0 + 1e-12);
            let lo = radius * 0.5f64.powi(k as i32 + 2) * (1.0 - 1e-12);
            fit_tracked(&tracked, |x| x >= lo && x <= hi)
        })
        .collect();
    let spread = |f: &[WhithamCurve], g: &[WhithamCurve]| {
        f.iter()
            .zip(g)
            .map(|(x, y)| {
                let da = (x.a - y.a).norm() / y.a.norm().max(1e-3);
                let db = (x.b - y.b).norm() / y.b.norm().max(1e-2);
                da.max(db)
            })
            .fold(0.0, f64::max)
    };
    let (best, best_spread) = (0..fits.len() - 1)
        .map(|k| (k, spread(&fits[k], &fits[k + 1])))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least two fit levels");
    Ok(WhithamFit {
        curves: fits[best].clone(),
        fit_radius: radius * 0.5f64.powi(best as i32),
        fifth_curve: tracked.fifth_curve,
        plateau_spread: Some(best_spread),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub max_re_outside: f64,
    /// Largest real part over samples inside the origin ball.
    pub max_re_inside: f64,
    pub whitham: Vec<WhithamCurve>,
    pub curve_count_near_origin: usize,
    pub fifth_curve: Option<c64>,
    pub fit_radius: f64,
    pub plateau_spread: Option<f64>,
    pub settings: HillSettings,
    pub diagnostics: Vec<String>,
}

/// Diffusive spectral stability: spectrum away from the origin strictly
/// stable, neutral curves hyperbolic and parabolic, nothing unstable near 0.
pub fn classify(samples: &[SpectrumSample], fit: &WhithamFit, settings: &HillSettings) -> StabilityVerdict {
    let mut max_out = f64::NEG_INFINITY;
    let mut max_in = f64::NEG_INFINITY;
    for s in samples {
        for z in &s.eigenvalues {
            if z.norm() > settings.r0 {
                max_out = max_out.max(z.re);
            } else {
                max_in = max_in.max(z.re);
            }
        }
    }
    let mut diagnostics = Vec::new();
    if max_out > settings.tol_stab {
        diagnostics.push(format!("spectrum outside the origin ball reaches Re = {max_out:.3e}"));
    }
    for (j, c) in fit.curves.iter().enumerate() {
        if c.a.im.abs() > settings.tol_hyp {
            diagnostics.push(format!("curve {j}: Im a = {:.3e} (not hyperbolic)", c.a.im));
        }
        if c.b.re < -settings.tol_curv {
            diagnostics.push(format!("curve {j}: Re b = {:.3e} (not parabolic)", c.b.re));
        }
    }
    if max_in > settings.tol_stab {
        diagnostics.push(format!("spectrum inside the origin ball reaches Re = {max_in:.3e}"));
    }
    StabilityVerdict {
        stable: diagnostics.is_empty(),
        max_re_outside: max_out,
        max_re_inside: max_in,
        whitham: fit.curves.clone(),
        curve_count_near_origin: fit.curves.len(),
        fifth_curve: fit.fifth_curve,
        fit_radius: fit.fit_radius,
        plateau_spread: fit.plateau_spread,
        settings: *settings,
        diagnostics,
    }
}

#[derive(Debug, Clone)]
pub struct HillAnalysis {
    pub samples: Vec<SpectrumSample>,
    pub fit: WhithamFit,
    pub verdict: StabilityVerdict,
}

/// Spectrum, Whitham fit and verdict for a converged profile.
pub fn analyze_profile(profile: &PeriodicProfile, spec: &SystemSpec, settings: &HillSettings) -> Result<HillAnalysis> {
    settings.validate()?;
    let op = linearize_about(profile, spec);
    let samples = compute_spectrum(&op, settings.n_floquet, settings.modes)?;
    let fit = whitham_fit(&op, settings)?;
    let verdict = classify(&samples, &fit, settings);
    Ok(HillAnalysis { samples, fit, verdict })
}
