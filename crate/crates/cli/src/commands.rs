use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use turing_core::dispersion::{
    assert_no_2x2_turing, assert_symmetrizable_obstruction, check_cond, find_turing_point_in, max_growth, symmetrizable_suite,
    CondReport, NoTuringReport, ScanWindow, SymmetrizableReport, TuringPoint,
};
use turing_core::evolve::{validate_constant_state, validate_verdict, EvolveOptions, ValidationReport};
use turing_core::hill::{classify, compute_spectrum, linearize_about, whitham_fit, HillSettings, SpectrumSample, StabilityVerdict, WhithamFit};
use turing_core::profile::{continue_family, seed_profile, NewtonOptions, ProfileRecord, SeedPlan};
use turing_core::Error;

use crate::range::Range;
use crate::report::Report;
use crate::sweep::{load_system, seed_target};

/// Residual above which a stored profile is refused.
pub const RECORD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeConfig {
    pub system: PathBuf,
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub window: ScanWindow,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum AnalyzeResult {
    /// The structural conditions fail at one end of the bracket.
    CondFailure { eps: f64, cond: CondReport },
    /// `A(ε) − cI` symmetric and `D + Dᵀ` positive definite for every `c`.
    NoTuring { message: String, cond: CondReport },
    Turing { cond: CondReport, turing: TuringPoint, growth_lo: f64, growth_hi: f64 },
}

pub fn analyze(config: &AnalyzeConfig) -> Result<AnalyzeResult> {
    let spec = load_system(&config.system)?;
    let d = spec.d.as_ref();
    let mut cond = None;
    for eps in [config.eps_lo, config.eps_hi] {
        let report = check_cond(spec.evaluate_a(eps).as_ref(), d)?;
        if !report.passes {
            return Ok(AnalyzeResult::CondFailure { eps, cond: report });
        }
        cond.get_or_insert(report);
    }
    let cond = cond.expect("bracket has two ends");
    let symmetric = [config.eps_lo, config.eps_hi]
        .iter()
        .map(|&eps| assert_symmetrizable_obstruction(spec.evaluate_a(eps).as_ref(), d))
        .collect::<Vec<_>>();
    if symmetric.iter().all(|r| matches!(r, Ok(true))) {
        return Ok(AnalyzeResult::NoTuring {
            message: "no Turing instability possible: A - cI is symmetric and D + D^T positive definite, \
                      so D^-1 (A - cI) has no purely imaginary eigenvalue for any speed c"
                .into(),
            cond,
        });
    }
    let growth = |eps: f64| max_growth(spec.evaluate_a(eps).as_ref(), d, config.window).map(|g| g.growth);
    let turing = find_turing_point_in(&spec, config.eps_lo, config.eps_hi, config.window).map_err(|e| match e {
        Error::NoSignChange { .. } => anyhow!(
            "{e}; the constant state must be stable at --eps-lo and unstable at --eps-hi, widen or move the bracket"
        ),
        Error::GrowthBracket { .. } => anyhow!("{e}; raise --xi-max"),
        other => anyhow!(other),
    })?;
    Ok(AnalyzeResult::Turing { cond, turing, growth_lo: growth(config.eps_lo)?, growth_hi: growth(config.eps_hi)? })
}

pub fn load_record(path: &Path) -> Result<ProfileRecord> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing profile record {}", path.display()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumConfig {
    pub record: PathBuf,
    pub hill: HillSettings,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub eps: f64,
    pub speed: f64,
    pub period: f64,
    pub residual_norm: f64,
    pub verdict: StabilityVerdict,
}

pub fn write_spectrum_dat(path: &Path, samples: &[SpectrumSample]) -> Result<()> {
    let mut text = String::from("# xi re im\n");
    for s in samples {
        for z in &s.eigenvalues {
            text.push_str(&format!("{:.12e} {:.12e} {:.12e}\n", s.xi, z.re, z.im));
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn gnuplot_script(data: &str, title: &str) -> String {
    format!(
        "set title \"{title}\"\n\
         set xlabel \"Re lambda\"\n\
         set ylabel \"Im lambda\"\n\
         set key off\n\
         set xzeroaxis lt 0\n\
         set arrow from 0, graph 0 to 0, graph 1 nohead dt 2 lc rgb \"black\"\n\
         plot \"{data}\" using 2:3 with points pt 7 ps 0.3 lc rgb \"#c0307a\"\n\
         pause mouse close\n"
    )
}

/// Spectrum, verdict and a plot script for a stored profile.
pub fn spectrum(config: &SpectrumConfig) -> Result<SpectrumResult> {
    let record = load_record(&config.record)?;
    let (spec, profile) = record.restore().context("stale or corrupt record")?;
    if !(profile.residual_norm <= RECORD_TOL) {
        bail!(
            "stale or corrupt record: residual {:.3e} exceeds {RECORD_TOL:e} on re-verification",
            profile.residual_norm
        );
    }
    fs::create_dir_all(&config.out)?;
    let op = linearize_about(&profile, &spec);
    let samples = compute_spectrum(&op, config.hill.n_floquet, config.hill.modes)?;
    write_spectrum_dat(&config.out.join("spectrum.dat"), &samples)?;
    let title = format!("c = {:.6}, X = {:.4}, eps = {:.4e}", profile.speed, profile.period, profile.eps);
    fs::write(config.out.join("spectrum.gp"), gnuplot_script("spectrum.dat", &title))?;
    let verdict = match whitham_fit(&op, &config.hill) {
        Ok(fit) => classify(&samples, &fit, &config.hill),
        Err(e) => {
            let empty = WhithamFit { curves: Vec::new(), fit_radius: config.hill.fit_radius, fifth_curve: None, plateau_spread: None };
            let mut v = classify(&samples, &empty, &config.hill);
            v.stable = false;
            v.diagnostics.push(format!("Whitham fit failed: {e}"));
            v
        }
    };
    let result = SpectrumResult {
        eps: profile.eps,
        speed: profile.speed,
        period: profile.period,
        residual_norm: profile.residual_norm,
        verdict,
    };
    Report::new(config, &result).write(&config.out.join("verdict.json"))?;
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExistenceConfig {
    pub system: PathBuf,
    pub period: f64,
    pub c0: Range,
    pub eps_bracket: (f64, f64),
    pub seed: SeedPlan,
    pub seed_point: Option<(f64, f64)>,
    pub grid: usize,
    pub newton: NewtonOptions,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExistenceResult {
    pub turing: TuringPoint,
    pub points: Vec<(f64, Option<f64>)>,
    pub gaps: usize,
    pub seed_error: Option<String>,
}

/// Solved `ε` along `c⁰` at fixed period; failures are gaps.
pub fn existence_curve(config: &ExistenceConfig) -> Result<ExistenceResult> {
    if !(config.period > 0.0) {
        bail!("period must be positive");
    }
    let spec = load_system(&config.system)?;
    let turing = turing_core::dispersion::find_turing_point(&spec, config.eps_bracket.0, config.eps_bracket.1)
        .context("locating the Turing point; adjust --eps-lo/--eps-hi")?;
    let c0s = config.c0.values();
    let speeds: Vec<f64> = c0s.iter().map(|c| turing.c_star + c).collect();
    let target = seed_target(&config.seed, config.seed_point, &turing);
    let family = seed_profile(&spec, &turing, target, &config.seed, config.grid, config.newton)
        .and_then(|seed| continue_family(&spec, &seed, &speeds, &[config.period], config.newton));
    let (eps, seed_error): (Vec<Option<f64>>, _) = match family {
        Ok(f) => ((0..c0s.len()).map(|ic| f.get(ic, 0).map(|p| p.eps)).collect(), None),
        Err(e) => (vec![None; c0s.len()], Some(e.to_string())),
    };
    let points: Vec<(f64, Option<f64>)> = c0s.into_iter().zip(eps).collect();
    fs::create_dir_all(&config.out)?;
    let mut csv = String::from("c0,eps\n");
    for (c0, e) in &points {
        csv.push_str(&format!("{c0},{}\n", e.map(|x| format!("{x:e}")).unwrap_or_default()));
    }
    fs::write(config.out.join("existence.csv"), csv)?;
    let result = ExistenceResult { turing, gaps: points.iter().filter(|p| p.1.is_none()).count(), points, seed_error };
    Report::new(config, &result).write(&config.out.join("existence.json"))?;
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ValidateTarget {
    Record { path: PathBuf, hill: HillSettings, expect: Option<bool> },
    Constant { system: PathBuf, eps: f64, c0: f64, period: f64, grid: usize, expect: Option<bool>, eps_bracket: (f64, f64) },
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateConfig {
    pub target: ValidateTarget,
    pub pert_amp: Option<f64>,
    pub evolve: EvolveOptions,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateResult {
    pub hill_stable: bool,
    pub pert_amp: f64,
    pub report: ValidationReport,
}

/// Time-evolution check of a Hill verdict, or of the constant state.
pub fn validate(config: &ValidateConfig) -> Result<ValidateResult> {
    let (hill_stable, pert_amp, report) = match &config.target {
        ValidateTarget::Record { path, hill, expect } => {
            let (spec, profile) = load_record(path)?.restore().context("stale or corrupt record")?;
            if !(profile.residual_norm <= RECORD_TOL) {
                bail!("stale or corrupt record: residual {:.3e}", profile.residual_norm);
            }
            let verdict = turing_core::hill::analyze_profile(&profile, &spec, hill)?.verdict;
            let mut expected = verdict.clone();
            if let Some(e) = expect {
                expected.stable = *e;
            }
            let amp = config.pert_amp.unwrap_or(1e-3 * profile.amplitude());
            (verdict.stable, amp, validate_verdict(&profile, &spec, &expected, amp, &config.evolve)?)
        }
        ValidateTarget::Constant { system, eps, c0, period, grid, expect, eps_bracket } => {
            let spec = load_system(system)?;
            let turing = turing_core::dispersion::find_turing_point(&spec, eps_bracket.0, eps_bracket.1)?;
            let growth = max_growth(spec.evaluate_a(*eps).as_ref(), spec.d.as_ref(), ScanWindow::default())?.growth;
            let stable = growth <= 0.0;
            let amp = config.pert_amp.unwrap_or(1e-6);
            let report = validate_constant_state(
                &spec,
                *eps,
                turing.c_star + c0,
                *period,
                *grid,
                amp,
                expect.unwrap_or(stable),
                &config.evolve,
            )?;
            (stable, amp, report)
        }
    };
    fs::create_dir_all(&config.out)?;
    let mut series = String::from("# t distance\n");
    for (t, d) in &report.run.amp_series {
        series.push_str(&format!("{t:.10e} {d:.10e}\n"));
    }
    fs::write(config.out.join("amp_series.dat"), series)?;
    let result = ValidateResult { hill_stable, pert_amp, report };
    Report::new(config, &result).write(&config.out.join("validate.json"))?;
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
pub struct NegativeConfig {
    pub samples: usize,
    pub pairs: usize,
    pub dimension: usize,
    pub seed: u64,
    pub system: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NegativeResult {
    pub two_by_two: NoTuringReport,
    pub symmetrizable: SymmetrizableReport,
    pub system_cond: Option<CondReport>,
    pub passed: bool,
}

/// Randomized suites for the two obstructions, plus an optional COND check.
pub fn check_negative(config: &NegativeConfig) -> Result<NegativeResult> {
    let two_by_two = assert_no_2x2_turing(config.samples, config.seed);
    let symmetrizable = symmetrizable_suite(config.pairs, config.dimension, config.seed)?;
    let system_cond = match &config.system {
        Some(path) => {
            let spec = load_system(path)?;
            Some(check_cond(spec.evaluate_a(0.0).as_ref(), spec.d.as_ref())?)
        }
        None => None,
    };
    let passed = two_by_two.violations() == 0 && symmetrizable.holds == symmetrizable.samples;
    Ok(NegativeResult { two_by_two, symmetrizable, system_cond, passed })
}
