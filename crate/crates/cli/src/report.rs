use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

pub const TOOL: &str = "turing";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope for every JSON report.
#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: C,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(config: C, result: R) -> Self {
        Self { tool: TOOL, version: VERSION, config, result }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
