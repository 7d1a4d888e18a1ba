//! Batch analyses behind the `turing` binary: onset search, diagram sweeps,
//! spectra of stored profiles, existence curves, time-evolution checks and
//! the randomized negative-result suites.
//!
//! Every command writes plain data files plus a JSON report carrying the
//! tool version and the fully resolved configuration.

pub mod commands;
pub mod range;
pub mod report;
pub mod sweep;

pub use range::Range;
pub use report::Report;
