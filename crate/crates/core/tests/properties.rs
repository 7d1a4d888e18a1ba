use std::sync::OnceLock;

use faer::Mat;
use proptest::prelude::*;
use turing_core::dispersion::{find_turing_point, TuringPoint};
use turing_core::evolve::Stepper;
use turing_core::hill::{build_hill_matrix, linearize_about, spectrum_at};
use turing_core::linalg::sort_spectrum;
use turing_core::models::{reference_system, Nonlinearity, SystemSpec};
use turing_core::profile::{
    continue_family, profile_residual, seed_profile, solve_profile, NewtonOptions, PeriodicProfile, SeedPlan, WaveParams,
};
use turing_core::{c64, spectral};

struct Wave {
    spec: SystemSpec,
    turing: TuringPoint,
    profile: PeriodicProfile,
}

fn quadratic_wave() -> &'static Wave {
    static WAVE: OnceLock<Wave> = OnceLock::new();
    WAVE.get_or_init(|| {
        let spec = reference_system(Nonlinearity::QUADRATIC, -10.0);
        let turing = find_turing_point(&spec, -0.5, 0.5).unwrap();
        let target = WaveParams { speed: turing.c_star + 4.06e-3, period: 5.44 };
        let profile = seed_profile(&spec, &turing, target, &SeedPlan::default(), 64, NewtonOptions::default()).unwrap();
        Wave { spec, turing, profile }
    })
}

fn max_abs(m: &Mat<f64>) -> f64 {
    turing_core::linalg::max_abs(m.as_ref())
}

fn resample(profile: &PeriodicProfile, m: usize) -> Mat<f64> {
    let n = profile.grid.ncols();
    let src = profile.grid.nrows();
    let cols: Vec<Vec<c64>> = (0..n).map(|i| spectral::forward(&profile.component(i))).collect();
    Mat::from_fn(m, n, |r, i| {
        let x = r as f64 / m as f64;
        (0..src)
            .map(|j| {
                let k = spectral::mode_index(j, src);
                if 2 * k.unsigned_abs() as usize == src {
                    return 0.0;
                }
                (cols[i][j] * c64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * x)).re
            })
            .sum()
    })
}

#[test]
fn doubling_the_grid_leaves_eps_unchanged() {
    let w = quadratic_wave();
    let guess = turing_core::profile::ProfileGuess {
        grid: resample(&w.profile, 128),
        eps: w.profile.eps,
        phase_w: Some(w.profile.phase_w.clone()),
    };
    let fine = solve_profile(&w.spec, &guess, w.profile.params(), NewtonOptions::default()).unwrap();
    assert!((fine.eps - w.profile.eps).abs() < 1e-9, "{} vs {}", fine.eps, w.profile.eps);
}

#[test]
fn profile_coefficients_decay_to_round_off() {
    let w = quadratic_wave();
    for i in 0..3 {
        let hat = spectral::forward(&w.profile.component(i));
        let top = hat.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tail = (20..=32).map(|k| hat[k].norm()).fold(0.0, f64::max);
        assert!(tail < 1e-13 * top.max(1e-300) + 1e-16, "component {i}: tail {tail:e} vs {top:e}");
    }
}

#[test]
fn amplitude_grows_like_square_root_of_eps() {
    let w = quadratic_wave();
    let x = w.turing.x_star;
    let c0s = [2e-4, 6e-4, 2e-3];
    let speeds: Vec<f64> = c0s.iter().map(|c| w.turing.c_star + c).collect();
    let family = continue_family(&w.spec, &w.profile, &speeds, &[x], NewtonOptions::default()).unwrap();
    let members: Vec<&PeriodicProfile> = (0..c0s.len()).map(|ic| family.get(ic, 0).unwrap()).collect();
    let lift = |p: &PeriodicProfile| p.eps - w.turing.eps_star;
    let (first, last) = (members[0], members[c0s.len() - 1]);
    assert!(lift(last) / lift(first) >= 10.0, "eps range {:e}..{:e} is not a decade", lift(first), lift(last));
    let ratios: Vec<f64> = members.iter().map(|p| p.amplitude() / lift(p).sqrt()).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(hi / lo - 1.0 < 0.1, "amplitude / sqrt(eps - eps*) ranges {lo}..{hi}");
}

#[test]
fn continuation_is_path_independent() {
    let w = quadratic_wave();
    let speeds: Vec<f64> = [0.003, 0.006, 0.009].iter().map(|c| w.turing.c_star + c).collect();
    let periods = [5.43, 5.45, 5.47];
    let forward = continue_family(&w.spec, &w.profile, &speeds, &periods, NewtonOptions::default()).unwrap();
    let rev_speeds: Vec<f64> = speeds.iter().rev().cloned().collect();
    let rev_periods: Vec<f64> = periods.iter().rev().cloned().collect();
    let backward = continue_family(&w.spec, &w.profile, &rev_speeds, &rev_periods, NewtonOptions::default()).unwrap();
    let mut compared = 0;
    for ic in 0..3 {
        for ix in 0..3 {
            if let (Some(a), Some(b)) = (forward.get(ic, ix), backward.get(2 - ic, 2 - ix)) {
                assert!((a.eps - b.eps).abs() < 1e-9, "({ic}, {ix}): {} vs {}", a.eps, b.eps);
                compared += 1;
            }
        }
    }
    assert!(compared >= 6);
}

#[test]
fn translation_gives_an_eigenvalue_at_zero() {
    let w = quadratic_wave();
    let op = linearize_about(&w.profile, &w.spec);
    let at_zero = spectrum_at(&op, &[0.0], 41).unwrap();
    let smallest = at_zero[0].eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    assert!(smallest < 1e-8, "smallest |lambda(0)| = {smallest:e}");
}

#[test]
fn hill_matrix_is_in_conservation_form() {
    let w = quadratic_wave();
    let op = linearize_about(&w.profile, &w.spec);
    let modes = 21;
    let h = build_hill_matrix(&op, 0.0, modes);
    let zero_mode = modes / 2;
    for i in 0..3 {
        let r = zero_mode * 3 + i;
        let worst = (0..h.ncols()).map(|c| h[(r, c)].norm()).fold(0.0, f64::max);
        assert!(worst < 1e-14, "mean row {i} has entry {worst:e}");
    }
}

/// The zero eigenvalue at `ξ = 0` is defective; its splitting reflects
/// conditioning rather than truncation, so the cluster is compared by size.
#[test]
fn leading_hill_eigenvalues_converge_in_mode_count() {
    let w = quadratic_wave();
    let op = linearize_about(&w.profile, &w.spec);
    for xi in [0.0, 0.2, -0.45] {
        let leading = |modes: usize, keep: usize| {
            let mut v = spectrum_at(&op, &[xi], modes).unwrap().remove(0).eigenvalues;
            sort_spectrum(&mut v);
            v.truncate(keep);
            let cluster = v.iter().filter(|z| z.norm() < 1e-6).count();
            v.retain(|z| z.norm() >= 1e-6);
            (cluster, v)
        };
        // The cut at 20 may split a conjugate pair, so search the fine list wider.
        let ((nc, coarse), (nf, fine)) = (leading(41, 20), leading(81, 40));
        assert_eq!(nc, nf);
        for a in &coarse {
            let nearest = fine.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-8, "xi = {xi}: {a} moved by {nearest:e}");
        }
    }
}

#[test]
fn bloch_coefficients_decay_geometrically() {
    let w = quadratic_wave();
    let op = linearize_about(&w.profile, &w.spec);
    let size = |k: i64| {
        let m = op.zeroth_coefficient(k).unwrap();
        (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].norm()).fold(0.0, f64::max)
    };
    let tail: Vec<(f64, f64)> = (1..=8).map(|k| (k as f64, size(k).max(1e-300).ln())).collect();
    let n = tail.len() as f64;
    let (mk, ml) = tail.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0 / n, acc.1 + p.1 / n));
    let slope = tail.iter().map(|p| (p.0 - mk) * (p.1 - ml)).sum::<f64>() / tail.iter().map(|p| (p.0 - mk).powi(2)).sum::<f64>();
    assert!(slope < 0.0, "decay rate {slope}");
    for k in 2..=8 {
        assert!(size(k) <= size(1) * 1.0001, "mode {k} exceeds mode 1");
    }
}

#[test]
fn exponential_euler_is_first_order() {
    let spec = reference_system(Nonlinearity::QUADRATIC, -10.0);
    let (m, length, t) = (32, 5.4, 0.5);
    let u0 = Mat::from_fn(m, 3, |r, i| 0.2 * (2.0 * std::f64::consts::PI * r as f64 / m as f64 + i as f64).sin());
    let run = |steps: usize| {
        let stepper = Stepper::new(&spec, 0.05, 1.3, length, m, t / steps as f64).unwrap();
        (0..steps).fold(u0.clone(), |u, _| stepper.step(&u))
    };
    let reference = run(1600);
    let e1 = max_abs(&(&run(50) - &reference));
    let e2 = max_abs(&(&run(100) - &reference));
    let ratio = e1 / e2;
    assert!((1.7..=2.3).contains(&ratio), "error ratio {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn translates_of_a_wave_solve_the_profile_equation(sites in 0usize..64) {
        let w = quadratic_wave();
        let shifted = w.profile.shifted_grid(sites);
        let r = profile_residual(&w.spec, &shifted, w.profile.params(), w.profile.eps, &w.profile.q);
        prop_assert!(max_abs(&r) < 1e-9);
    }

    #[test]
    fn hill_spectrum_is_periodic_in_the_floquet_exponent(xi in -0.5..0.5f64) {
        let w = quadratic_wave();
        let op = linearize_about(&w.profile, &w.spec);
        let shift = 2.0 * std::f64::consts::PI / w.profile.period;
        let mut a = spectrum_at(&op, &[xi], 41).unwrap().remove(0).eigenvalues;
        let mut b = spectrum_at(&op, &[xi + shift], 41).unwrap().remove(0).eigenvalues;
        sort_spectrum(&mut a);
        sort_spectrum(&mut b);
        // Truncation drops one band at the edge; compare the well-resolved top.
        for p in a.iter().take(30) {
            let nearest = b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < 1e-8, "{} moved by {:e}", p, nearest);
        }
    }
}
