//! NE density along a pesticide gradient for hedgerow-only and
//! grassland-only landscapes.

use serde::{Deserialize, Serialize};

use super::Context;
use crate::ecology::run_to_equilibrium;
use crate::error::Result;
use crate::exec::{self, ExecMode};
use crate::model::{build_landscape, replicate_seed, HedgerowTarget, ResolvedFarm};
use crate::table::{num, opt_num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// All habitat as hedgerow.
    Hedgerow,
    /// All habitat as grassland.
    Grassland,
}

impl Layout {
    pub fn name(self) -> &'static str {
        match self {
            Layout::Hedgerow => "hedgerow",
            Layout::Grassland => "grassland",
        }
    }

    fn shares(self, snh: f64) -> (f64, f64) {
        match self {
            Layout::Hedgerow => (snh, 0.0),
            Layout::Grassland => (0.0, snh),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub field_size: f64,
    pub layout: Layout,
    pub hedgerow_share: f64,
    pub grassland_share: f64,
    pub pesticide: f64,
    /// Replicate mean of the all-cell density, individuals per m².
    pub density: f64,
    pub crop_density: f64,
    /// Standard error of `density` across replicates.
    pub density_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Ordered by field size, layout (hedgerow first), then pesticide.
    pub rows: Vec<SweepRow>,
    /// Crossing expenditure per field size.
    pub crossings: Vec<(f64, Option<f64>)>,
    pub provenance: [String; 3],
}

/// First expenditure at which `a − b` changes sign, by linear interpolation
/// between grid points. An exact tie on a grid point counts as a crossing
/// only if the curves separate afterwards.
pub fn crossing(grid: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    for i in 0..d.len().saturating_sub(1) {
        let (lo, hi) = (d[i], d[i + 1]);
        if lo == 0.0 && hi != 0.0 && i > 0 && d[i - 1] * hi < 0.0 {
            return Some(grid[i]);
        }
        if lo * hi < 0.0 {
            return Some(grid[i] + (grid[i + 1] - grid[i]) * lo / (lo - hi));
        }
    }
    None
}

pub fn sweep_pesticide(ctx: &Context) -> Result<SweepResult> {
    ctx.params.validate()?;
    ctx.settings.validate()?;
    let s = &ctx.settings;
    let layouts = [Layout::Hedgerow, Layout::Grassland];
    let reps = ctx.replicates;
    let curves = s.sweep_field_sizes.len() * layouts.len();
    let grid = &s.pesticide_grid;
    // One job per (curve, replicate): build the landscape once, sweep π.
    let per_job = exec::try_map_indexed(ctx.mode, curves * reps, |i| -> Result<Vec<(f64, f64)>> {
        let (c, k) = (i / reps, i % reps);
        let field_size = s.sweep_field_sizes[c / layouts.len()];
        let (h, g) = layouts[c % layouts.len()].shares(s.sweep_snh_share);
        let farm = ResolvedFarm {
            farm_size: ctx.params.geometry.area(),
            field_size,
            grassland_share: g,
            hedgerow: HedgerowTarget::Share(h),
            pesticide: 0.0,
        };
        let land = build_landscape(&farm, ctx.params.geometry, replicate_seed(ctx.seed, k as u64))?;
        grid.iter()
            .map(|&pi| {
                let (_, summary) = run_to_equilibrium(&land, pi, &ctx.params.ecology, ExecMode::Sequential)?;
                Ok((summary.mean_density_m2, summary.crop_density_m2))
            })
            .collect()
    })?;

    let mut rows = Vec::with_capacity(curves * grid.len());
    let mut crossings = Vec::new();
    let n = reps as f64;
    for c in 0..curves {
        let field_size = s.sweep_field_sizes[c / layouts.len()];
        let layout = layouts[c % layouts.len()];
        let (h, g) = layout.shares(s.sweep_snh_share);
        let jobs = &per_job[c * reps..(c + 1) * reps];
        for (p, &pi) in grid.iter().enumerate() {
            let dens: Vec<f64> = jobs.iter().map(|j| j[p].0).collect();
            let mean = dens.iter().sum::<f64>() / n;
            let crop = jobs.iter().map(|j| j[p].1).sum::<f64>() / n;
            let se = if reps > 1 {
                (dens.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
            } else {
                f64::NAN
            };
            rows.push(SweepRow {
                field_size,
                layout,
                hedgerow_share: h,
                grassland_share: g,
                pesticide: pi,
                density: mean,
                crop_density: crop,
                density_se: se,
            });
        }
        if layout == Layout::Grassland {
            let m = grid.len();
            let hedge: Vec<f64> = rows[rows.len() - 2 * m..rows.len() - m].iter().map(|r| r.density).collect();
            let grass: Vec<f64> = rows[rows.len() - m..].iter().map(|r| r.density).collect();
            crossings.push((field_size, crossing(grid, &hedge, &grass)));
        }
    }
    Ok(SweepResult {
        rows,
        crossings,
        provenance: ctx.provenance(),
    })
}

impl SweepResult {
    pub const HEADER: [&'static str; 13] = [
        "scenario",
        "S",
        "layout",
        "h",
        "g",
        "pi",
        "ne_density",
        "ne_density_crop",
        "ne_density_se",
        "pi_star",
        "profile",
        "seed",
        "replicates",
    ];

    pub fn curve(&self, field_size: f64, layout: Layout) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.field_size == field_size && r.layout == layout)
            .collect()
    }

    pub fn crossing_for(&self, field_size: f64) -> Option<f64> {
        self.crossings.iter().find(|(s, _)| *s == field_size).and_then(|(_, c)| *c)
    }

    pub fn to_table(&self, scenario: &str) -> Table {
        let mut t = Table::new(&Self::HEADER);
        for r in &self.rows {
            let mut row = vec![
                scenario.to_string(),
                num(r.field_size),
                r.layout.name().to_string(),
                num(r.hedgerow_share),
                num(r.grassland_share),
                num(r.pesticide),
                num(r.density),
                num(r.crop_density),
                num(r.density_se),
                opt_num(self.crossing_for(r.field_size)),
            ];
            row.extend(self.provenance.iter().cloned());
            t.push(row);
        }
        t
    }
}
