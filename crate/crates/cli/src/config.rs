use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use spillfleet::control::{FblGains, PidGains};
use spillfleet::harness::{BenchmarkSpec, MissionConfig, SweepGrid, TrackingOptions};
use spillfleet::routing::SolverConfig;
use spillfleet::scenario::GeneratorParams;
use std::path::Path;

/// Contents of `--config FILE`. Every section is optional and falls back to the
/// library defaults; command-line flags override the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub generator: GeneratorParams,
    pub solver: SolverConfig,
    pub bench: BenchmarkSpec,
    pub tracking: TrackingOptions,
    pub sweep: SweepGrid,
    pub mission: MissionConfig,
    pub pid: Option<PidGains>,
    pub fbl: Option<FblGains>,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
