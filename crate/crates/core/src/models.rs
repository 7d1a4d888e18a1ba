//! Conservation-law systems `u_t + (A(ε) u + N(u))_x = D u_xx`.
//!
//! A system is a constant flux matrix `A(ε)` (a base matrix with ε added at
//! one designated entry), a constant viscosity `D`, and a polynomial
//! nonlinearity acting on the first component only.
//!
//! Systems are read from TOML documents:
//!
//! ```toml
//! label = "quadratic"
//! n = 3
//! a = [[1.0, 0.0, 0.0], [0.0, 2.605173614560316, 0.0], [0.0, 0.0, 3.0]]
//! d = [[1.0, 0.0, 2.0], [0.0, 1.0, 1.0], [1.0, -2.0, 1.0]]
//! eps_slot = [1, 1]   # zero-based (row, column) of the entry shifted by ε
//! beta = -10.0
//!
//! [nonlinearity]
//! kind = "quadratic"  # none | quadratic | cubic | homotopy
//! h = 0.0             # homotopy weight, only read for kind = "homotopy"
//! ```

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficient `a_22` of the published three-component examples.
pub const A22_REFERENCE: f64 = 2.605173614560316;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearityKind {
    None,
    Quadratic,
    Cubic,
    Homotopy,
}

/// `N(u) = β (g(u₁), 0, …, 0)` with `g` one of `0`, `u₁²`, `u₁³`, or the
/// blend `h u₁³ + (1 − h) u₁²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub kind: NonlinearityKind,
    #[serde(default)]
    pub h: f64,
}

impl Nonlinearity {
    pub const NONE: Self = Self { kind: NonlinearityKind::None, h: 0.0 };
    pub const QUADRATIC: Self = Self { kind: NonlinearityKind::Quadratic, h: 0.0 };
    pub const CUBIC: Self = Self { kind: NonlinearityKind::Cubic, h: 0.0 };

    pub fn homotopy(h: f64) -> Self {
        Self { kind: NonlinearityKind::Homotopy, h }
    }

    /// Weights `(w2, w3)` so that `g(s) = w2 s² + w3 s³`.
    fn weights(&self) -> (f64, f64) {
        match self.kind {
            NonlinearityKind::None => (0.0, 0.0),
            NonlinearityKind::Quadratic => (1.0, 0.0),
            NonlinearityKind::Cubic => (0.0, 1.0),
            NonlinearityKind::Homotopy => (1.0 - self.h, self.h),
        }
    }

    pub fn g(&self, s: f64) -> f64 {
        let (w2, w3) = self.weights();
        w2 * s * s + w3 * s * s * s
    }

    pub fn dg(&self, s: f64) -> f64 {
        let (w2, w3) = self.weights();
        2.0 * w2 * s + 3.0 * w3 * s * s
    }

    pub fn d2g(&self, s: f64) -> f64 {
        let (w2, w3) = self.weights();
        2.0 * w2 + 6.0 * w3 * s
    }

    pub fn is_linear(&self) -> bool {
        self.weights() == (0.0, 0.0)
    }
}

/// On-disk form of a [`SystemSpec`]. Matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    #[serde(default)]
    pub label: String,
    pub n: usize,
    pub a: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
    #[serde(default = "default_slot")]
    pub eps_slot: [usize; 2],
    #[serde(default)]
    pub beta: f64,
    pub nonlinearity: NonlinearityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearityConfig {
    pub kind: String,
    #[serde(default)]
    pub h: f64,
}

fn default_slot() -> [usize; 2] {
    [1, 1]
}

/// A validated `n × n` system. Immutable once built.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub label: String,
    pub a_base: Mat<f64>,
    pub eps_slot: (usize, usize),
    pub d: Mat<f64>,
    pub nonlinearity: Nonlinearity,
    pub beta: f64,
}

fn matrix_from_rows(rows: &[Vec<f64>], n: usize, name: &'static str) -> Result<Mat<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be {n}×{n}, got {}×{}",
            rows.len(),
            rows.first().map_or(0, Vec::len)
        )));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(name));
    }
    Ok(Mat::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows_of(m: &Mat<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl SystemConfig {
    pub fn into_spec(self) -> Result<SystemSpec> {
        if self.n == 0 {
            return Err(Error::DimensionMismatch("n must be positive".into()));
        }
        let a_base = matrix_from_rows(&self.a, self.n, "a")?;
        let d = matrix_from_rows(&self.d, self.n, "d")?;
        if !self.beta.is_finite() || !self.nonlinearity.h.is_finite() {
            return Err(Error::NonFinite("beta/h"));
        }
        let [r, c] = self.eps_slot;
        if r >= self.n || c >= self.n {
            return Err(Error::DimensionMismatch(format!(
                "eps_slot ({r}, {c}) outside a {n}×{n} matrix",
                n = self.n
            )));
        }
        let kind = match self.nonlinearity.kind.to_ascii_lowercase().as_str() {
            "none" | "linear" => NonlinearityKind::None,
            "quadratic" => NonlinearityKind::Quadratic,
            "cubic" => NonlinearityKind::Cubic,
            "homotopy" => NonlinearityKind::Homotopy,
            other => return Err(Error::UnknownNonlinearity(other.to_string())),
        };
        if kind == NonlinearityKind::Homotopy && !(0.0..=1.0).contains(&self.nonlinearity.h) {
            return Err(Error::InvalidArgument(format!(
                "homotopy weight h = {} outside [0, 1]",
                self.nonlinearity.h
            )));
        }
        Ok(SystemSpec {
            label: self.label,
            a_base,
            eps_slot: (r, c),
            d,
            nonlinearity: Nonlinearity { kind, h: self.nonlinearity.h },
            beta: self.beta,
        })
    }
}

/// Parses and validates a TOML system document.
pub fn load_system(document: &str) -> Result<SystemSpec> {
    let config: SystemConfig = toml::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    config.into_spec()
}

impl SystemSpec {
    pub fn n(&self) -> usize {
        self.a_base.nrows()
    }

    pub fn to_config(&self) -> SystemConfig {
        let kind = match self.nonlinearity.kind {
            NonlinearityKind::None => "none",
            NonlinearityKind::Quadratic => "quadratic",
            NonlinearityKind::Cubic => "cubic",
            NonlinearityKind::Homotopy => "homotopy",
        };
        SystemConfig {
            label: self.label.clone(),
            n: self.n(),
            a: rows_of(&self.a_base),
            d: rows_of(&self.d),
            eps_slot: [self.eps_slot.0, self.eps_slot.1],
            beta: self.beta,
            nonlinearity: NonlinearityConfig { kind: kind.into(), h: self.nonlinearity.h },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_config()).expect("system config is always serializable")
    }

    pub fn with_nonlinearity(&self, nonlinearity: Nonlinearity, beta: f64) -> Self {
        Self { nonlinearity, beta, ..self.clone() }
    }

    pub fn with_viscosity(&self, d: Mat<f64>) -> Self {
        Self { d, ..self.clone() }
    }

    /// `A(ε)`: the base matrix with ε added at the designated entry.
    pub fn evaluate_a(&self, eps: f64) -> Mat<f64> {
        let mut a = self.a_base.clone();
        a[self.eps_slot] += eps;
        a
    }

    /// `N(u)`.
    pub fn nonlinear_flux(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        out[0] = self.beta * self.nonlinearity.g(u[0]);
        out
    }

    /// `A(ε) u + N(u)`.
    pub fn evaluate_flux(&self, u: &[f64], eps: f64) -> Vec<f64> {
        let a = self.evaluate_a(eps);
        let n = self.n();
        let mut out = self.nonlinear_flux(u);
        for i in 0..n {
            for j in 0..n {
                out[i] += a[(i, j)] * u[j];
            }
        }
        out
    }

    /// `dN(u)` is zero except for its (0, 0) entry, returned here.
    pub fn nonlinear_slope(&self, u0: f64) -> f64 {
        self.beta * self.nonlinearity.dg(u0)
    }

    pub fn nonlinear_curvature(&self, u0: f64) -> f64 {
        self.beta * self.nonlinearity.d2g(u0)
    }

    /// `A(ε) + dN(u)`.
    pub fn evaluate_flux_jacobian(&self, u: &[f64], eps: f64) -> Mat<f64> {
        let mut a = self.evaluate_a(eps);
        a[(0, 0)] += self.nonlinear_slope(u[0]);
        a
    }
}

/// Three-component example with `A(ε) = diag(1, a22 + ε, 3)`.
pub fn reference_system(nonlinearity: Nonlinearity, beta: f64) -> SystemSpec {
    SystemSpec {
        label: match nonlinearity.kind {
            NonlinearityKind::None => "linear",
            NonlinearityKind::Quadratic => "quadratic",
            NonlinearityKind::Cubic => "cubic",
            NonlinearityKind::Homotopy => "homotopy",
        }
        .to_string(),
        a_base: Mat::from_fn(3, 3, |i, j| if i == j { [1.0, A22_REFERENCE, 3.0][i] } else { 0.0 }),
        eps_slot: (1, 1),
        d: reference_viscosity(),
        nonlinearity,
        beta,
    }
}

/// Nonsymmetric viscosity with spectrum {1} shared by all three-component examples.
pub fn reference_viscosity() -> Mat<f64> {
    let rows = [[1.0, 0.0, 2.0], [0.0, 1.0, 1.0], [1.0, -2.0, 1.0]];
    Mat::from_fn(3, 3, |i, j| rows[i][j])
}

/// The non-strictly hyperbolic example `A(ε) = diag(1, ε, 1)` with the same viscosity.
pub fn nonstrict_system() -> SystemSpec {
    SystemSpec {
        label: "nonstrict".into(),
        a_base: Mat::from_fn(3, 3, |i, j| if i == j { [1.0, 0.0, 1.0][i] } else { 0.0 }),
        eps_slot: (1, 1),
        d: reference_viscosity(),
        nonlinearity: Nonlinearity::NONE,
        beta: 0.0,
    }
}
