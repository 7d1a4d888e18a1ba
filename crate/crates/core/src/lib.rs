//! Turing-type instabilities in viscous systems of conservation laws.
//!
//! * [`models`]: systems `u_t + (A(ε)u + N(u))_x = D u_xx` and their TOML form.
//! * [`dispersion`]: constant-state symbols, structural checks, onset search.
//! * [`profile`]: periodic traveling waves by Newton on a Fourier grid.
//! * [`hill`]: Floquet–Bloch spectra of those waves and a stability verdict.
//! * [`evolve`]: direct time integration used to cross-check verdicts.

pub mod dispersion;
pub mod error;
pub mod evolve;
pub mod hill;
pub mod linalg;
pub mod models;
pub mod profile;
pub mod spectral;

pub use error::{Error, Result};
#[allow(non_camel_case_types)]
pub type c64 = num_complex::Complex64;
