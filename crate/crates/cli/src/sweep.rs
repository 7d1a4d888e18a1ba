//! Stability diagrams over a `(c⁰, X)` grid.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use turing_core::dispersion::{find_turing_point, TuringPoint};
use turing_core::hill::{analyze_profile, HillSettings};
use turing_core::models::SystemSpec;
use turing_core::profile::{continue_family, seed_profile, NewtonOptions, PeriodicProfile, ProfileRecord, SeedPlan, SeedRoute, WaveParams};

use crate::range::Range;
use crate::report::Report;

pub const CSV_HEADER: &str = "c0,X,eps,verdict,max_re_outside,amplitude";

#[derive(Debug, Clone, Serialize)]
pub struct SweepPlan {
    pub system: PathBuf,
    pub c0: Range,
    pub period: Range,
    pub eps_bracket: (f64, f64),
    pub seed: SeedPlan,
    /// Target of the seed solve as `(c⁰, X)`; the onset point when absent.
    pub seed_point: Option<(f64, f64)>,
    pub grid: usize,
    pub newton: NewtonOptions,
    pub hill: HillSettings,
    pub workers: usize,
    pub out: PathBuf,
    pub save_profiles: bool,
}

impl SweepPlan {
    pub fn validate(&self) -> Result<()> {
        if self.c0.count == 0 || self.period.count == 0 {
            bail!("sweep ranges must be nonempty");
        }
        if self.period.values().iter().any(|&x| !(x > 0.0)) {
            bail!("periods must be positive");
        }
        if self.workers == 0 {
            bail!("worker count must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    Unstable,
    NoProfile,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::NoProfile => "no-profile",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "stable" => Some(Verdict::Stable),
            "unstable" => Some(Verdict::Unstable),
            "no-profile" => Some(Verdict::NoProfile),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramPoint {
    pub c0: f64,
    pub period: f64,
    pub eps: Option<f64>,
    pub verdict: Verdict,
    pub max_re_outside: Option<f64>,
    pub amplitude: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl DiagramPoint {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.c0,
            self.period,
            opt(self.eps),
            self.verdict.as_str(),
            opt(self.max_re_outside),
            opt(self.amplitude)
        )
    }

    pub fn parse_row(line: &str) -> Option<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return None;
        }
        let num = |s: &str| if s.is_empty() { Some(None) } else { s.parse::<f64>().ok().map(Some) };
        Some(Self {
            c0: f[0].parse().ok()?,
            period: f[1].parse().ok()?,
            eps: num(f[2])?,
            verdict: Verdict::parse(f[3])?,
            max_re_outside: num(f[4])?,
            amplitude: num(f[5])?,
        })
    }

    fn key(&self) -> (u64, u64) {
        key(self.c0, self.period)
    }
}

fn key(c0: f64, period: f64) -> (u64, u64) {
    (c0.to_bits(), period.to_bits())
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub turing: TuringPoint,
    pub points: usize,
    pub resumed: usize,
    pub stable: usize,
    pub unstable: usize,
    pub no_profile: usize,
    pub seed_error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub points: Vec<DiagramPoint>,
    pub summary: SweepSummary,
}

pub fn load_system(path: &Path) -> Result<SystemSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    turing_core::models::load_system(&text).with_context(|| format!("loading {}", path.display()))
}

/// Rows already present in a diagram file; unparsable lines (a torn last
/// write) are dropped.
pub fn read_rows(path: &Path) -> Result<Vec<DiagramPoint>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for line in BufReader::new(file).lines() {
        if let Some(p) = DiagramPoint::parse_row(&line?) {
            rows.push(p);
        }
    }
    Ok(rows)
}

fn write_sorted(path: &Path, rows: &[DiagramPoint]) -> Result<()> {
    let mut text = String::from(CSV_HEADER);
    text.push('\n');
    for r in rows {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn profile_file_name(c0: f64, period: f64) -> String {
    format!("c0_{c0}_X_{period}.json")
}

fn classify_point(
    spec: &SystemSpec,
    profile: Option<&PeriodicProfile>,
    c0: f64,
    period: f64,
    plan: &SweepPlan,
    turing: &TuringPoint,
) -> Result<DiagramPoint> {
    let Some(profile) = profile else {
        return Ok(DiagramPoint { c0, period, eps: None, verdict: Verdict::NoProfile, max_re_outside: None, amplitude: None });
    };
    if plan.save_profiles {
        let record = ProfileRecord::new(spec, profile, Some(turing.c_star));
        let path = plan.out.join("profiles").join(profile_file_name(c0, period));
        fs::write(&path, serde_json::to_string(&record)?).with_context(|| format!("writing {}", path.display()))?;
    }
    // A spectrum that cannot be resolved is not certified stable.
    let (verdict, max_re) = match analyze_profile(profile, spec, &plan.hill) {
        Ok(a) if a.verdict.stable => (Verdict::Stable, Some(a.verdict.max_re_outside)),
        Ok(a) => (Verdict::Unstable, Some(a.verdict.max_re_outside)),
        Err(_) => (Verdict::Unstable, None),
    };
    Ok(DiagramPoint {
        c0,
        period,
        eps: Some(profile.eps),
        verdict,
        max_re_outside: max_re,
        amplitude: Some(profile.amplitude()),
    })
}

/// Where the seed wave is solved: the given `(c⁰, X)`, or else the point
/// the route arrives at on its own (the mirrored onset point for
/// [`SeedRoute::Mirror`]).
pub fn seed_target(plan: &SeedPlan, point: Option<(f64, f64)>, turing: &TuringPoint) -> WaveParams {
    match point {
        Some((c0, x)) => WaveParams { speed: turing.c_star + c0, period: x },
        None => {
            let onset = plan.onset(turing);
            match plan.route {
                SeedRoute::Mirror { .. } => WaveParams { speed: turing.c_star - plan.onset_c0, ..onset },
                _ => onset,
            }
        }
    }
}

/// Runs the sweep, appending rows to `diagram.csv` as points finish and
/// skipping points already recorded there. The file is rewritten sorted by
/// `(c⁰, X)` at the end, followed by `summary.json`.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepOutcome> {
    plan.validate()?;
    let spec = load_system(&plan.system)?;
    fs::create_dir_all(&plan.out).with_context(|| format!("creating {}", plan.out.display()))?;
    if plan.save_profiles {
        fs::create_dir_all(plan.out.join("profiles"))?;
    }
    let csv_path = plan.out.join("diagram.csv");
    let previous = read_rows(&csv_path)?;

    let c0s = plan.c0.values();
    let periods = plan.period.values();
    let wanted: Vec<(f64, f64)> = c0s.iter().flat_map(|&c| periods.iter().map(move |&x| (c, x))).collect();
    let mut done: BTreeMap<(u64, u64), DiagramPoint> = BTreeMap::new();
    for p in previous {
        if wanted.iter().any(|&(c, x)| key(c, x) == p.key()) {
            done.insert(p.key(), p);
        }
    }
    let resumed = done.len();
    // Start from a clean file holding only the recovered rows.
    write_sorted(&csv_path, &done.values().cloned().collect::<Vec<_>>())?;

    let (lo, hi) = plan.eps_bracket;
    let turing = find_turing_point(&spec, lo, hi).context("locating the Turing point; adjust --eps-lo/--eps-hi")?;
    let mut seed_error = None;
    if done.len() < wanted.len() {
        let speeds: Vec<f64> = c0s.iter().map(|c| turing.c_star + c).collect();
        let target = seed_target(&plan.seed, plan.seed_point, &turing);
        let family = seed_profile(&spec, &turing, target, &plan.seed, plan.grid, plan.newton)
            .and_then(|seed| continue_family(&spec, &seed, &speeds, &periods, plan.newton));
        let family = match family {
            Ok(f) => Some(f),
            Err(e) => {
                seed_error = Some(e.to_string());
                None
            }
        };
        let appender = Mutex::new(OpenOptions::new().append(true).open(&csv_path)?);
        let todo: Vec<(usize, usize)> = (0..c0s.len())
            .flat_map(|ic| (0..periods.len()).map(move |ix| (ic, ix)))
            .filter(|&(ic, ix)| !done.contains_key(&key(c0s[ic], periods[ix])))
            .collect();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(plan.workers).build()?;
        let fresh: Vec<DiagramPoint> = pool.install(|| {
            todo.par_iter()
                .map(|&(ic, ix)| {
                    let profile = family.as_ref().and_then(|f| f.get(ic, ix));
                    let point = classify_point(&spec, profile, c0s[ic], periods[ix], plan, &turing)?;
                    let mut file = appender.lock().expect("appender lock");
                    writeln!(file, "{}", point.csv_row())?;
                    file.flush()?;
                    Ok(point)
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for p in fresh {
            done.insert(p.key(), p);
        }
    }

    let mut points: Vec<DiagramPoint> = done.into_values().collect();
    points.sort_by(|a, b| a.c0.total_cmp(&b.c0).then(a.period.total_cmp(&b.period)));
    write_sorted(&csv_path, &points)?;
    let count = |v: Verdict| points.iter().filter(|p| p.verdict == v).count();
    let summary = SweepSummary {
        turing,
        points: points.len(),
        resumed,
        stable: count(Verdict::Stable),
        unstable: count(Verdict::Unstable),
        no_profile: count(Verdict::NoProfile),
        seed_error,
    };
    Report::new(plan, &summary).write(&plan.out.join("summary.json"))?;
    Ok(SweepOutcome { points, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip_through_csv() {
        let p = DiagramPoint {
            c0: 0.0221,
            period: 5.44,
            eps: Some(2.959e-3),
            verdict: Verdict::Stable,
            max_re_outside: Some(-1.5e-3),
            amplitude: Some(0.02),
        };
        assert_eq!(DiagramPoint::parse_row(&p.csv_row()), Some(p));
        let gap = DiagramPoint { c0: 0.1, period: 6.0, eps: None, verdict: Verdict::NoProfile, max_re_outside: None, amplitude: None };
        assert_eq!(gap.csv_row(), "0.1,6,,no-profile,,");
        assert_eq!(DiagramPoint::parse_row(&gap.csv_row()), Some(gap));
        assert_eq!(DiagramPoint::parse_row("0.1,6,1e-3,stab"), None);
    }
}
