//! Scenario experiments built on [`crate::model`].
//!
//! Every experiment uses the same replicate seeds for all of its
//! configurations, so differences between rows reflect the configuration
//! rather than landscape sampling noise.

mod manifest;
mod phase;
mod policy;
mod sensitivity;
mod sweep;

pub use manifest::{Manifest, ManifestEntry};
pub use phase::{phase_diagram, PhaseResult, PhaseRow};
pub use policy::{policy_grid, PolicyResult, PolicyRow, SnhPolicy};
pub use sensitivity::{sensitivity, SensitivityId, SensitivityResult};
pub use sweep::{crossing, sweep_pesticide, Layout, SweepResult, SweepRow};

use crate::config::{Profile, RunConfig, ScenarioSettings};
use crate::exec::ExecMode;
use crate::model::ModelParams;

/// Everything an experiment needs besides its own settings.
#[derive(Debug, Clone)]
pub struct Context {
    pub params: ModelParams,
    pub settings: ScenarioSettings,
    pub seed: u64,
    pub replicates: usize,
    pub profile: Profile,
    pub mode: ExecMode,
}

impl Context {
    pub fn from_config(cfg: &RunConfig, mode: ExecMode) -> Self {
        Self {
            params: cfg.model_params(),
            settings: cfg.scenarios.clone(),
            seed: cfg.seed,
            replicates: cfg.replicates,
            profile: cfg.profile,
            mode,
        }
    }

    fn provenance(&self) -> [String; 3] {
        [self.profile.name().to_string(), self.seed.to_string(), self.replicates.to_string()]
    }
}

/// Percentage change of `value` relative to `base`; `None` when the base is
/// zero.
pub fn pct_change(value: f64, base: f64) -> Option<f64> {
    if base == 0.0 {
        None
    } else {
        Some(100.0 * (value - base) / base.abs())
    }
}
