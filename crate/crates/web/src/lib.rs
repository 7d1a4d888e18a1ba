//! WebAssembly bindings for the browser demo. Every export takes a system
//! document in the fixture TOML format and returns a JSON string.

use serde::Serialize;
use turing_core::dispersion::{find_turing_point, symbol_eigenvalues, TuringPoint};
use turing_core::hill::{analyze_profile, HillSettings};
use turing_core::models::{load_system, SystemSpec};
use turing_core::profile::{seed_profile, NewtonOptions, SeedPlan, WaveParams};
use wasm_bindgen::prelude::*;

const EPS_BRACKET: (f64, f64) = (-0.5, 0.5);

fn system(document: &str) -> Result<SystemSpec, JsError> {
    load_system(document).map_err(|e| JsError::new(&e.to_string()))
}

fn json<T: Serialize>(value: &T) -> Result<String, JsError> {
    serde_json::to_string(value).map_err(|e| JsError::new(&e.to_string()))
}

fn err(e: turing_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[derive(Serialize)]
struct Curves {
    xi: Vec<f64>,
    /// `re[j][k]`: real part of the `j`-th eigenvalue at `xi[k]`, largest first.
    re: Vec<Vec<f64>>,
}

/// Real parts of the constant-state spectrum `σ(−iξA(ε) − ξ²D)` on `[0, xi_max]`.
#[wasm_bindgen]
pub fn dispersion_curves(document: &str, eps: f64, xi_max: f64, points: usize) -> Result<String, JsError> {
    let spec = system(document)?;
    let a = spec.evaluate_a(eps);
    let points = points.clamp(2, 5000);
    let xi: Vec<f64> = (0..points).map(|k| xi_max * k as f64 / (points - 1) as f64).collect();
    let mut re = vec![Vec::with_capacity(points); spec.n()];
    for &x in &xi {
        let mut values: Vec<f64> = symbol_eigenvalues(a.as_ref(), spec.d.as_ref(), x).map_err(err)?.iter().map(|z| z.re).collect();
        values.sort_by(|p, q| q.total_cmp(p));
        for (j, v) in values.into_iter().enumerate() {
            re[j].push(v);
        }
    }
    json(&Curves { xi, re })
}

/// Onset parameter, critical wavenumber, frequency, speed and period.
#[wasm_bindgen]
pub fn turing_point(document: &str) -> Result<String, JsError> {
    let spec = system(document)?;
    json(&find_turing_point(&spec, EPS_BRACKET.0, EPS_BRACKET.1).map_err(err)?)
}

#[derive(Serialize)]
struct WaveReport {
    turing: TuringPoint,
    eps: f64,
    speed: f64,
    period: f64,
    residual: f64,
    /// First component over one period.
    profile: Vec<f64>,
    /// `(Re λ, Im λ)` pairs over the Floquet grid.
    spectrum: Vec<(f64, f64)>,
    stable: bool,
    diagnostics: Vec<String>,
}

/// Solves the wave at `(c* + c0, period)` by continuation from onset and
/// classifies it with Hill's method.
#[wasm_bindgen]
pub fn wave_spectrum(document: &str, c0: f64, period: f64, n_floquet: usize, modes: usize) -> Result<String, JsError> {
    let spec = system(document)?;
    let turing = find_turing_point(&spec, EPS_BRACKET.0, EPS_BRACKET.1).map_err(err)?;
    let target = WaveParams { speed: turing.c_star + c0, period };
    let profile = seed_profile(&spec, &turing, target, &SeedPlan::default(), 64, NewtonOptions::default()).map_err(err)?;
    let settings = HillSettings { n_floquet: n_floquet | 1, modes: modes | 1, ..HillSettings::default() };
    let analysis = analyze_profile(&profile, &spec, &settings).map_err(err)?;
    json(&WaveReport {
        turing,
        eps: profile.eps,
        speed: profile.speed,
        period: profile.period,
        residual: profile.residual_norm,
        profile: profile.component(0),
        spectrum: analysis.samples.iter().flat_map(|s| s.eigenvalues.iter().map(|z| (z.re, z.im))).collect(),
        stable: analysis.verdict.stable,
        diagnostics: analysis.verdict.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUADRATIC: &str = include_str!("../../../fixtures/quadratic.toml");

    #[test]
    fn turing_point_is_reported() {
        let v: serde_json::Value = serde_json::from_str(&turing_point(QUADRATIC).ok().unwrap()).unwrap();
        assert!((v["c_star"].as_f64().unwrap() - 1.296).abs() < 1e-3);
    }

    #[test]
    fn curves_have_one_row_per_component() {
        let v: serde_json::Value = serde_json::from_str(&dispersion_curves(QUADRATIC, 0.2, 3.0, 31).ok().unwrap()).unwrap();
        assert_eq!(v["re"].as_array().unwrap().len(), 3);
        assert_eq!(v["xi"].as_array().unwrap().len(), 31);
        assert!(v["re"][0].as_array().unwrap().iter().any(|x| x.as_f64().unwrap() > 0.0));
    }

    #[test]
    fn published_wave_is_stable() {
        let v: serde_json::Value = serde_json::from_str(&wave_spectrum(QUADRATIC, 4.06e-3, 5.44, 21, 21).ok().unwrap()).unwrap();
        assert_eq!(v["stable"], true);
        assert_eq!(v["profile"].as_array().unwrap().len(), 64);
    }
}
