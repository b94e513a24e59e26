//! Farm size × hedgerow cover under a pesticide change.

use serde::{Deserialize, Serialize};

use super::{pct_change, Context};
use crate::error::Result;
use crate::model::{simulate_many, FarmConfig, HedgerowTarget, Simulation};
use crate::table::{num, opt_num, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub farm_size: f64,
    /// Fraction of field-margin cells planted with hedgerow.
    pub margin_fraction: f64,
    pub sim: Simulation,
    pub baseline_pesticide: f64,
    pub income_change: Option<f64>,
    pub yield_change: f64,
    pub revenue_change: f64,
    /// Baseline expenditure times the scenario's productive area.
    pub saved_pesticide_cost: f64,
    pub income_delta: f64,
    pub is_optimum: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseResult {
    /// Ordered by farm size then margin fraction.
    pub rows: Vec<PhaseRow>,
    /// Replicate-mean baseline per farm size.
    pub baselines: Vec<Simulation>,
    pub provenance: [String; 3],
}

pub fn phase_diagram(ctx: &Context) -> Result<PhaseResult> {
    ctx.params.validate()?;
    ctx.settings.validate()?;
    let s = &ctx.settings;
    let per_size = 1 + s.phase_margin_fractions.len();
    let mut farms = Vec::new();
    for &l in &s.phase_farm_sizes {
        farms.push(FarmConfig::new(l).resolve(&ctx.params.scaling, &ctx.params.economics)?);
        for &f in &s.phase_margin_fractions {
            let cfg = FarmConfig::new(l)
                .with_hedgerow(HedgerowTarget::MarginFraction(f))
                .with_pesticide_change(s.phase_pesticide_change);
            farms.push(cfg.resolve(&ctx.params.scaling, &ctx.params.economics)?);
        }
    }
    let sims = simulate_many(&farms, &ctx.params, ctx.seed, ctx.replicates, ctx.mode)?;
    let mut rows = Vec::new();
    let mut baselines = Vec::new();
    for (b, chunk) in sims.chunks(per_size).enumerate() {
        let l = s.phase_farm_sizes[b];
        let base = &chunk[0];
        let start = rows.len();
        for (j, sim) in chunk[1..].iter().enumerate() {
            let saved = base.farm.pesticide * sim.report.productive_area;
            rows.push(PhaseRow {
                farm_size: l,
                margin_fraction: s.phase_margin_fractions[j],
                baseline_pesticide: base.farm.pesticide,
                income_change: pct_change(sim.report.income, base.report.income),
                yield_change: sim.report.mean_yield - base.report.mean_yield,
                revenue_change: sim.report.revenue - base.report.revenue,
                saved_pesticide_cost: saved,
                income_delta: sim.report.income - base.report.income,
                is_optimum: false,
                sim: sim.clone(),
            });
        }
        let best = (start..rows.len())
            .filter(|&i| rows[i].income_change.is_some())
            .max_by(|&a, &b| {
                let (x, y) = (rows[a].income_change.unwrap(), rows[b].income_change.unwrap());
                x.total_cmp(&y).then(b.cmp(&a))
            });
        if let Some(i) = best {
            rows[i].is_optimum = true;
        }
        baselines.push(base.clone());
    }
    Ok(PhaseResult {
        rows,
        baselines,
        provenance: ctx.provenance(),
    })
}

impl PhaseResult {
    pub const HEADER: [&'static str; 23] = [
        "scenario",
        "L",
        "S",
        "g",
        "margin_fraction",
        "h",
        "pi",
        "baseline_pi",
        "ne_density",
        "ybar",
        "revenue",
        "costs",
        "profit",
        "income",
        "income_change_pct",
        "d_yield",
        "d_revenue",
        "saved_pesticide_cost",
        "d_income",
        "is_optimum",
        "profile",
        "seed",
        "replicates",
    ];

    /// The optimal row for a farm size.
    pub fn optimum(&self, farm_size: f64) -> Option<&PhaseRow> {
        self.rows.iter().find(|r| r.farm_size == farm_size && r.is_optimum)
    }

    pub fn to_table(&self, scenario: &str) -> Table {
        let mut t = Table::new(&Self::HEADER);
        for r in &self.rows {
            let rep = &r.sim.report;
            let mut row = vec![
                scenario.to_string(),
                num(r.farm_size),
                num(rep.field_size),
                num(rep.grassland_share),
                num(r.margin_fraction),
                num(rep.hedgerow_share),
                num(rep.pesticide),
                num(r.baseline_pesticide),
                num(r.sim.density),
                num(rep.mean_yield),
                num(rep.revenue),
                num(rep.costs),
                num(rep.profit),
                num(rep.income),
                opt_num(r.income_change),
                num(r.yield_change),
                num(r.revenue_change),
                num(r.saved_pesticide_cost),
                num(r.income_delta),
                r.is_optimum.to_string(),
            ];
            row.extend(self.provenance.iter().cloned());
            t.push(row);
        }
        t
    }
}
