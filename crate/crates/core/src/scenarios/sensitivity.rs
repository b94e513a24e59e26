//! Re-running the sweep and the policy grid under an altered ecological
//! parameter, after recalibrating the yield parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{policy_grid, sweep_pesticide, Context, PolicyResult, SweepResult};
use crate::calibration::{calibrate, CalibrationResult, CalibrationSettings, TargetTable};
use crate::ecology::EcologyParams;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensitivityId {
    /// Twice the habitat needed for half winter survival.
    #[serde(rename = "snref_x2")]
    OverwinterRefDoubled,
    /// Twice the reference pesticide expenditure.
    #[serde(rename = "piref_x2")]
    PesticideRefDoubled,
    /// Pesticide selectivity of one half.
    #[serde(rename = "q_half")]
    HalfSelective,
}

impl SensitivityId {
    pub const ALL: [SensitivityId; 3] = [
        SensitivityId::OverwinterRefDoubled,
        SensitivityId::PesticideRefDoubled,
        SensitivityId::HalfSelective,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SensitivityId::OverwinterRefDoubled => "snref_x2",
            SensitivityId::PesticideRefDoubled => "piref_x2",
            SensitivityId::HalfSelective => "q_half",
        }
    }

    pub fn apply(self, eco: &EcologyParams) -> EcologyParams {
        let mut e = *eco;
        match self {
            SensitivityId::OverwinterRefDoubled => e.overwinter_ref *= 2.0,
            SensitivityId::PesticideRefDoubled => e.pesticide_ref *= 2.0,
            SensitivityId::HalfSelective => e.selectivity = 0.5,
        }
        e
    }
}

impl fmt::Display for SensitivityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SensitivityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SensitivityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown sensitivity scenario `{s}` (expected snref_x2, piref_x2 or q_half)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityResult {
    pub id: SensitivityId,
    pub calibration: CalibrationResult,
    pub altered: ModelParams,
    pub baseline_sweep: SweepResult,
    pub altered_sweep: SweepResult,
    pub baseline_policy: PolicyResult,
    pub altered_policy: PolicyResult,
}

pub fn sensitivity(
    ctx: &Context,
    id: SensitivityId,
    calibration: &CalibrationSettings,
    targets: &TargetTable,
) -> Result<SensitivityResult> {
    let mut altered = ctx.params;
    altered.ecology = id.apply(&ctx.params.ecology);
    let calib = calibrate(calibration, targets, &altered, ctx.seed, ctx.mode)?;
    altered.economics = calib.best.apply(&altered.economics);
    let alt_ctx = Context {
        params: altered,
        ..ctx.clone()
    };
    Ok(SensitivityResult {
        id,
        calibration: calib,
        altered,
        baseline_sweep: sweep_pesticide(ctx)?,
        altered_sweep: sweep_pesticide(&alt_ctx)?,
        baseline_policy: policy_grid(ctx)?,
        altered_policy: policy_grid(&alt_ctx)?,
    })
}

fn with_variant(tables: [(&str, Table); 2]) -> Table {
    let [(_, first), _] = &tables;
    let mut header = vec!["variant".to_string()];
    header.extend(first.header.iter().cloned());
    let mut out = Table {
        header,
        rows: Vec::new(),
    };
    for (variant, t) in tables {
        for row in t.rows {
            let mut r = vec![variant.to_string()];
            r.extend(row);
            out.rows.push(r);
        }
    }
    out
}

impl SensitivityResult {
    /// Policy-grid rows for the baseline and the altered parameters.
    pub fn policy_table(&self) -> Table {
        let scenario = format!("sens_{}", self.id);
        with_variant([
            ("baseline", self.baseline_policy.to_table(&scenario)),
            (self.id.name(), self.altered_policy.to_table(&scenario)),
        ])
    }

    /// Sweep rows for the baseline and the altered parameters.
    pub fn sweep_table(&self) -> Table {
        let scenario = format!("sens_{}", self.id);
        with_variant([
            ("baseline", self.baseline_sweep.to_table(&scenario)),
            (self.id.name(), self.altered_sweep.to_table(&scenario)),
        ])
    }
}
