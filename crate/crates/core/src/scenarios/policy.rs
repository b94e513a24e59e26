//! Pesticide-reduction × habitat-increase policy grid.

use serde::{Deserialize, Serialize};

use super::{pct_change, Context};
use crate::error::Result;
use crate::model::{simulate_many, FarmConfig, Simulation};
use crate::table::{num, opt_num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnhPolicy {
    None,
    /// Raise the hedgerow share by the configured increment.
    Hedgerow,
    /// Raise the grassland share by the configured increment.
    Grassland,
}

impl SnhPolicy {
    pub const ALL: [SnhPolicy; 3] = [SnhPolicy::None, SnhPolicy::Hedgerow, SnhPolicy::Grassland];

    pub fn name(self) -> &'static str {
        match self {
            SnhPolicy::None => "none",
            SnhPolicy::Hedgerow => "hedgerow",
            SnhPolicy::Grassland => "grassland",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRow {
    pub farm_size: f64,
    pub pesticide_change: f64,
    pub snh_policy: SnhPolicy,
    pub sim: Simulation,
    pub density_change: Option<f64>,
    pub production_change: Option<f64>,
    pub yield_change: Option<f64>,
    pub income_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyResult {
    /// Ordered by farm size, pesticide change (as configured), policy.
    pub rows: Vec<PolicyRow>,
    pub provenance: [String; 3],
}

pub fn policy_grid(ctx: &Context) -> Result<PolicyResult> {
    ctx.params.validate()?;
    ctx.settings.validate()?;
    let s = &ctx.settings;
    let inc = s.policy_snh_increment;
    let mut keys = Vec::new();
    let mut farms = Vec::new();
    for &l in &s.policy_farm_sizes {
        // The baseline comes first for every farm size.
        let baseline = FarmConfig::new(l);
        farms.push(baseline.resolve(&ctx.params.scaling, &ctx.params.economics)?);
        for &dpi in &s.policy_pesticide_changes {
            for policy in SnhPolicy::ALL {
                let (dg, dh) = match policy {
                    SnhPolicy::None => (0.0, 0.0),
                    SnhPolicy::Hedgerow => (0.0, inc),
                    SnhPolicy::Grassland => (inc, 0.0),
                };
                let cfg = FarmConfig::new(l).with_pesticide_change(dpi).with_deltas(dg, dh);
                farms.push(cfg.resolve(&ctx.params.scaling, &ctx.params.economics)?);
                keys.push((l, dpi, policy));
            }
        }
    }
    let sims = simulate_many(&farms, &ctx.params, ctx.seed, ctx.replicates, ctx.mode)?;
    let per_size = 1 + s.policy_pesticide_changes.len() * SnhPolicy::ALL.len();
    let mut rows = Vec::with_capacity(keys.len());
    for (b, chunk) in sims.chunks(per_size).enumerate() {
        let base = &chunk[0];
        for (j, sim) in chunk[1..].iter().enumerate() {
            let (l, dpi, policy) = keys[b * (per_size - 1) + j];
            rows.push(PolicyRow {
                farm_size: l,
                pesticide_change: dpi,
                snh_policy: policy,
                density_change: pct_change(sim.density, base.density),
                production_change: pct_change(sim.report.production, base.report.production),
                yield_change: pct_change(sim.report.mean_yield, base.report.mean_yield),
                income_change: pct_change(sim.report.income, base.report.income),
                sim: sim.clone(),
            });
        }
    }
    Ok(PolicyResult {
        rows,
        provenance: ctx.provenance(),
    })
}

impl PolicyResult {
    pub const HEADER: [&'static str; 26] = [
        "scenario",
        "L",
        "S",
        "g",
        "h",
        "pi",
        "d_pi",
        "snh_policy",
        "ne_density",
        "ne_density_crop",
        "ybar",
        "production",
        "revenue",
        "costs",
        "profit",
        "labor",
        "income",
        "ne_change_pct",
        "production_change_pct",
        "yield_change_pct",
        "income_change_pct",
        "income_se",
        "zero_baseline",
        "profile",
        "seed",
        "replicates",
    ];

    pub fn get(&self, farm_size: f64, pesticide_change: f64, policy: SnhPolicy) -> Option<&PolicyRow> {
        self.rows
            .iter()
            .find(|r| r.farm_size == farm_size && r.pesticide_change == pesticide_change && r.snh_policy == policy)
    }

    pub fn to_table(&self, scenario: &str) -> Table {
        let mut t = Table::new(&Self::HEADER);
        for r in &self.rows {
            let rep = &r.sim.report;
            let changes = [r.density_change, r.production_change, r.yield_change, r.income_change];
            let mut row = vec![
                scenario.to_string(),
                num(r.farm_size),
                num(rep.field_size),
                num(rep.grassland_share),
                num(rep.hedgerow_share),
                num(rep.pesticide),
                num(r.pesticide_change),
                r.snh_policy.name().to_string(),
                num(r.sim.density),
                num(r.sim.crop_density),
                num(rep.mean_yield),
                num(rep.production),
                num(rep.revenue),
                num(rep.costs),
                num(rep.profit),
                num(rep.labor),
                num(rep.income),
            ];
            row.extend(changes.iter().map(|c| opt_num(*c)));
            row.push(num(r.sim.income_se));
            row.push(changes.iter().any(Option::is_none).to_string());
            row.extend(self.provenance.iter().cloned());
            t.push(row);
        }
        t
    }
}
