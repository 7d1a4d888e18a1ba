use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use turing_cli::commands::{self, AnalyzeResult, ValidateTarget};
use turing_cli::report::Report;
use turing_cli::sweep::{run_sweep, SweepPlan};
use turing_cli::Range;
use turing_core::dispersion::ScanWindow;
use turing_core::evolve::EvolveOptions;
use turing_core::hill::HillSettings;
use turing_core::profile::{NewtonOptions, SeedPlan, SeedRoute, DEFAULT_GRID};

#[derive(Parser)]
#[command(name = "turing", version, about = "Turing instabilities and periodic-wave stability for viscous conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural conditions and locate the Turing point.
    Analyze {
        system: PathBuf,
        #[command(flatten)]
        bracket: Bracket,
        #[arg(long, default_value_t = 10.0)]
        xi_max: f64,
        #[arg(long, default_value_t = 2000)]
        xi_points: usize,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stability diagram over a (c0, X) grid.
    Sweep {
        system: PathBuf,
        /// Shifted speeds c - c*, as lo:hi:count.
        #[arg(long, allow_hyphen_values = true)]
        c0: Range,
        /// Periods, as lo:hi:count.
        #[arg(long = "period", short = 'X')]
        period: Range,
        #[command(flatten)]
        bracket: Bracket,
        #[command(flatten)]
        seed: SeedArgs,
        /// Solve the seed wave at this c0 before continuing over the grid.
        #[arg(long, requires = "seed_period", allow_negative_numbers = true)]
        seed_c0: Option<f64>,
        #[arg(long)]
        seed_period: Option<f64>,
        #[command(flatten)]
        hill: HillArgs,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, short)]
        out: PathBuf,
        /// Store every converged profile under OUT/profiles.
        #[arg(long)]
        save_profiles: bool,
    },
    /// Hill spectrum and verdict for a stored profile.
    Spectrum {
        record: PathBuf,
        #[command(flatten)]
        hill: HillArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Solved eps along c0 at a fixed period.
    ExistenceCurve {
        system: PathBuf,
        #[arg(long = "period", short = 'X')]
        period: f64,
        #[arg(long, allow_hyphen_values = true)]
        c0: Range,
        #[command(flatten)]
        bracket: Bracket,
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long, requires = "seed_period", allow_negative_numbers = true)]
        seed_c0: Option<f64>,
        #[arg(long)]
        seed_period: Option<f64>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Perturb a stored wave (or the constant state) and integrate in time.
    Validate {
        /// Profile record; omit together with --constant.
        record: Option<PathBuf>,
        /// Perturb u = 0 of this system instead of a stored wave.
        #[arg(long, conflicts_with = "record")]
        constant: Option<PathBuf>,
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        c0: f64,
        /// Domain period for --constant; 2 pi / xi* when omitted.
        #[arg(long)]
        period: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Override the expected verdict.
        #[arg(long)]
        expect: Option<Expect>,
        /// Perturbation max-norm; 1e-3 of the wave amplitude by default.
        #[arg(long)]
        pert_amp: Option<f64>,
        #[arg(long, default_value_t = 200.0)]
        t_final: f64,
        /// Number of wave periods in the domain.
        #[arg(long, default_value_t = 1)]
        periods: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt_factor: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        bracket: Bracket,
        #[command(flatten)]
        hill: HillArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Randomized checks that no Turing instability can occur in the
    /// two-component and symmetrizable cases.
    CheckNegative {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1_000)]
        pairs: usize,
        /// Size of the symmetrizable pairs.
        #[arg(long, default_value_t = 3)]
        dimension: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Also report the structural conditions of this system.
        #[arg(long)]
        system: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Copy)]
struct Bracket {
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    eps_lo: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    eps_hi: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Route {
    Direct,
    Homotopy,
    Mirror,
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    Stable,
    Unstable,
}

#[derive(Args, Clone, Copy)]
struct SeedArgs {
    /// How the first wave is obtained.
    #[arg(long, value_enum, default_value_t = Route::Direct)]
    route: Route,
    /// Steps of the quadratic-to-cubic homotopy.
    #[arg(long, default_value_t = 10)]
    h_steps: usize,
    /// Phase-vector seed.
    #[arg(long, default_value_t = 1)]
    phase_seed: u64,
    /// Collocation points per period.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

impl SeedArgs {
    fn plan(&self) -> SeedPlan {
        let route = match self.route {
            Route::Direct => SeedRoute::Direct,
            Route::Homotopy => SeedRoute::Homotopy { h_steps: self.h_steps },
            Route::Mirror => SeedRoute::Mirror { h_steps: self.h_steps },
        };
        SeedPlan { route, ..SeedPlan::default() }
    }

    fn newton(&self) -> NewtonOptions {
        NewtonOptions { phase_seed: self.phase_seed, ..NewtonOptions::default() }
    }
}

#[derive(Args, Clone, Copy)]
struct HillArgs {
    #[arg(long, default_value_t = 101)]
    n_floquet: usize,
    /// Fourier modes per field (odd).
    #[arg(long, default_value_t = 41)]
    modes: usize,
    #[arg(long, default_value_t = 1e-2)]
    r0: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_stab: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol_hyp: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_curv: f64,
}

impl HillArgs {
    fn settings(&self) -> HillSettings {
        HillSettings {
            n_floquet: self.n_floquet,
            modes: self.modes,
            r0: self.r0,
            tol_stab: self.tol_stab,
            tol_hyp: self.tol_hyp,
            tol_curv: self.tol_curv,
            ..HillSettings::default()
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analyze { system, bracket, xi_max, xi_points, out } => {
            let config = commands::AnalyzeConfig {
                system,
                eps_lo: bracket.eps_lo,
                eps_hi: bracket.eps_hi,
                window: ScanWindow { xi_max, grid_points: xi_points },
            };
            let result = commands::analyze(&config)?;
            match &result {
                AnalyzeResult::CondFailure { .. } => eprintln!("structural conditions fail"),
                AnalyzeResult::NoTuring { message, .. } => eprintln!("{message}"),
                AnalyzeResult::Turing { .. } => {}
            }
            let report = Report::new(&config, &result);
            println!("{}", report.to_json());
            if let Some(path) = out {
                report.write(&path)?;
            }
            Ok(if matches!(result, AnalyzeResult::CondFailure { .. }) { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Sweep { system, c0, period, bracket, seed, seed_c0, seed_period, hill, workers, out, save_profiles } => {
            let plan = SweepPlan {
                system,
                c0,
                period,
                eps_bracket: (bracket.eps_lo, bracket.eps_hi),
                seed: seed.plan(),
                seed_point: seed_c0.zip(seed_period),
                grid: seed.grid,
                newton: seed.newton(),
                hill: hill.settings(),
                workers,
                out,
                save_profiles,
            };
            let outcome = run_sweep(&plan)?;
            print_json(&outcome.summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum { record, hill, out } => {
            let result = commands::spectrum(&commands::SpectrumConfig { record, hill: hill.settings(), out })?;
            print_json(&result);
            Ok(ExitCode::SUCCESS)
        }
        Command::ExistenceCurve { system, period, c0, bracket, seed, seed_c0, seed_period, out } => {
            let config = commands::ExistenceConfig {
                system,
                period,
                c0,
                eps_bracket: (bracket.eps_lo, bracket.eps_hi),
                seed: seed.plan(),
                seed_point: seed_c0.zip(seed_period),
                grid: seed.grid,
                newton: seed.newton(),
                out,
            };
            let result = commands::existence_curve(&config)?;
            eprintln!("{} of {} points are gaps", result.gaps, result.points.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            record,
            constant,
            eps,
            c0,
            period,
            grid,
            expect,
            pert_amp,
            t_final,
            periods,
            dt_factor,
            seed,
            bracket,
            hill,
            out,
        } => {
            let expect = expect.map(|e| matches!(e, Expect::Stable));
            let target = match (record, constant) {
                (Some(path), None) => ValidateTarget::Record { path, hill: hill.settings(), expect },
                (None, Some(system)) => {
                    let period = match period {
                        Some(p) => p,
                        None => {
                            let spec = turing_cli::sweep::load_system(&system)?;
                            let tp = turing_core::dispersion::find_turing_point(&spec, bracket.eps_lo, bracket.eps_hi)?;
                            tp.x_star
                        }
                    };
                    ValidateTarget::Constant { system, eps, c0, period, grid, expect, eps_bracket: (bracket.eps_lo, bracket.eps_hi) }
                }
                _ => bail!("give either a profile record or --constant SYSTEM"),
            };
            let evolve = EvolveOptions { periods, dt_factor, t_final, seed, ..EvolveOptions::default() };
            let result = commands::validate(&commands::ValidateConfig { target, pert_amp, evolve, out })?;
            print_json(&result);
            Ok(if result.report.agrees { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::CheckNegative { samples, pairs, dimension, seed, system } => {
            let config = commands::NegativeConfig { samples, pairs, dimension, seed, system };
            let result = commands::check_negative(&config)?;
            println!("{}", Report::new(&config, &result).to_json());
            Ok(if result.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
