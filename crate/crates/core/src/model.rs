//! The coupled landscape, ecology and economics model for one farm.

use serde::{Deserialize, Serialize};

use crate::ecology::{run_to_equilibrium, EcologyParams};
use crate::economics::{farm_account, mean_crop_damage, pesticide_intensity, EconParams, EconReport, FarmInputs};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::landscape::{
    generate_fields, margin_cell_count, place_grassland_cells, place_hedgerows_cells, scaling_laws,
    share_to_cells, Geometry, Landscape, LandscapeParams, ScalingLaw,
};
use crate::rng::{derive_path, label, StreamRng};

/// How much hedgerow the landscape carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HedgerowTarget {
    /// Fraction of the total area.
    Share(f64),
    /// Fraction of all field-margin cells, resolved per landscape.
    MarginFraction(f64),
}

/// A farm scenario. Unset structure is taken from the scaling laws and the
/// pesticide level from the farm-size expenditure curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarmConfig {
    pub farm_size: f64,
    pub field_size: Option<f64>,
    pub grassland_share: Option<f64>,
    pub hedgerow: Option<HedgerowTarget>,
    /// Added to the grassland share.
    pub grassland_delta: f64,
    /// Added to the hedgerow share (only for an area-share target).
    pub hedgerow_delta: f64,
    /// Absolute expenditure, €/ha/yr.
    pub pesticide: Option<f64>,
    /// Relative change applied to the expenditure; −1 removes it.
    pub pesticide_change: f64,
}

impl FarmConfig {
    pub fn new(farm_size: f64) -> Self {
        Self {
            farm_size,
            field_size: None,
            grassland_share: None,
            hedgerow: None,
            grassland_delta: 0.0,
            hedgerow_delta: 0.0,
            pesticide: None,
            pesticide_change: 0.0,
        }
    }

    pub fn with_field_size(mut self, s: f64) -> Self {
        self.field_size = Some(s);
        self
    }

    pub fn with_grassland(mut self, g: f64) -> Self {
        self.grassland_share = Some(g);
        self
    }

    pub fn with_hedgerow(mut self, target: HedgerowTarget) -> Self {
        self.hedgerow = Some(target);
        self
    }

    pub fn with_pesticide(mut self, pi: f64) -> Self {
        self.pesticide = Some(pi);
        self
    }

    pub fn with_pesticide_change(mut self, change: f64) -> Self {
        self.pesticide_change = change;
        self
    }

    pub fn with_deltas(mut self, grassland: f64, hedgerow: f64) -> Self {
        self.grassland_delta = grassland;
        self.hedgerow_delta = hedgerow;
        self
    }

    pub fn resolve(&self, law: &ScalingLaw, econ: &EconParams) -> Result<ResolvedFarm> {
        let laws = scaling_laws(self.farm_size, law)?;
        let field_size = self.field_size.unwrap_or(laws.field_size);
        let grassland_share = self.grassland_share.unwrap_or(laws.grassland_share) + self.grassland_delta;
        let hedgerow = match self.hedgerow.unwrap_or(HedgerowTarget::Share(laws.hedgerow_share)) {
            HedgerowTarget::Share(h) => HedgerowTarget::Share(h + self.hedgerow_delta),
            HedgerowTarget::MarginFraction(f) => {
                if self.hedgerow_delta != 0.0 {
                    return Err(Error::domain("a hedgerow delta needs an area-share target"));
                }
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::domain(format!("margin fraction must lie in [0,1], got {f}")));
                }
                HedgerowTarget::MarginFraction(f)
            }
        };
        let base = match self.pesticide {
            Some(p) => p,
            None => pesticide_intensity(self.farm_size, econ)?,
        };
        let pesticide = base * (1.0 + self.pesticide_change);
        if !(pesticide >= 0.0) {
            return Err(Error::domain(format!("resolved pesticide level {pesticide} is negative")));
        }
        Ok(ResolvedFarm {
            farm_size: self.farm_size,
            field_size,
            grassland_share,
            hedgerow,
            pesticide,
        })
    }
}

/// A farm with every structural input fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedFarm {
    pub farm_size: f64,
    pub field_size: f64,
    pub grassland_share: f64,
    pub hedgerow: HedgerowTarget,
    pub pesticide: f64,
}

/// All model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub geometry: Geometry,
    pub scaling: ScalingLaw,
    pub ecology: EcologyParams,
    pub economics: EconParams,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.scaling.validate()?;
        self.ecology.validate()?;
        self.economics.validate()
    }
}

/// Seed of replicate `k` under a master seed.
pub fn replicate_seed(master: u64, k: u64) -> u64 {
    derive_path(master, &[label::REPLICATE, k])
}

/// Build the landscape of one replicate.
pub fn build_landscape(farm: &ResolvedFarm, geometry: Geometry, seed: u64) -> Result<Landscape> {
    let nominal_h = match farm.hedgerow {
        HedgerowTarget::Share(h) => h,
        HedgerowTarget::MarginFraction(_) => 0.0,
    };
    let mut params = LandscapeParams {
        geometry,
        field_size: farm.field_size,
        hedgerow_share: nominal_h,
        grassland_share: farm.grassland_share,
        seed,
    };
    params.validate()?;
    let field_id = generate_fields(&params)?;
    let cells = geometry.cells();
    let hedge_cells = match farm.hedgerow {
        HedgerowTarget::Share(h) => share_to_cells(h, cells),
        HedgerowTarget::MarginFraction(f) => share_to_cells(f, margin_cell_count(&field_id)),
    };
    let mut cover = place_hedgerows_cells(&field_id, hedge_cells, &mut StreamRng::from_seed(seed, label::HEDGEROWS))?;
    place_grassland_cells(
        &field_id,
        &mut cover,
        share_to_cells(farm.grassland_share, cells),
        &mut StreamRng::from_seed(seed, label::GRASSLAND),
    )?;
    params.hedgerow_share = hedge_cells as f64 / cells as f64;
    params.validate()?;
    Landscape::from_parts(geometry, cover, field_id, Some(params))
}

/// Ecological state of one replicate, reduced to what the economics needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateEcology {
    pub seed: u64,
    pub field_count: usize,
    pub grassland_share: f64,
    pub hedgerow_share: f64,
    pub mean_damage: f64,
    pub density: f64,
    pub crop_density: f64,
}

pub fn replicate_ecology(
    farm: &ResolvedFarm,
    params: &ModelParams,
    seed: u64,
    mode: ExecMode,
) -> Result<ReplicateEcology> {
    let land = build_landscape(farm, params.geometry, seed)?;
    let (field, summary) = run_to_equilibrium(&land, farm.pesticide, &params.ecology, mode)?;
    let stats = land.stats();
    Ok(ReplicateEcology {
        seed,
        field_count: stats.field_count,
        grassland_share: stats.realized_g,
        hedgerow_share: stats.realized_h,
        mean_damage: mean_crop_damage(&land, &field, &params.ecology)?,
        density: summary.mean_density_m2,
        crop_density: summary.crop_density_m2,
    })
}

/// Farm account of one replicate; shares are the realised ones.
pub fn replicate_account(farm: &ResolvedFarm, eco: &ReplicateEcology, econ: &EconParams) -> Result<EconReport> {
    let mean_yield = econ.max_yield(farm.farm_size) * (1.0 - econ.max_pest_loss * eco.mean_damage);
    farm_account(
        &FarmInputs {
            mean_yield,
            farm_size: farm.farm_size,
            grassland_share: eco.grassland_share,
            hedgerow_share: eco.hedgerow_share,
            field_size: farm.field_size,
            pesticide: farm.pesticide,
        },
        econ,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub ecology: ReplicateEcology,
    pub report: EconReport,
}

pub fn simulate_replicate(
    farm: &ResolvedFarm,
    params: &ModelParams,
    seed: u64,
    mode: ExecMode,
) -> Result<ReplicateOutcome> {
    let ecology = replicate_ecology(farm, params, seed, mode)?;
    let report = replicate_account(farm, &ecology, &params.economics)?;
    Ok(ReplicateOutcome { ecology, report })
}

/// Replicate means of a farm scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub farm: ResolvedFarm,
    pub master_seed: u64,
    pub report: EconReport,
    pub density: f64,
    pub crop_density: f64,
    /// Standard error of the replicate mean income.
    pub income_se: f64,
    pub replicates: Vec<ReplicateOutcome>,
}

/// Run `replicates` independent landscapes and average. Replicates run in
/// parallel under [`ExecMode::Parallel`]; results do not depend on the mode.
pub fn simulate(
    farm: &FarmConfig,
    params: &ModelParams,
    master_seed: u64,
    replicates: usize,
    mode: ExecMode,
) -> Result<Simulation> {
    params.validate()?;
    let resolved = farm.resolve(&params.scaling, &params.economics)?;
    simulate_resolved(&resolved, params, master_seed, replicates, mode)
}

pub fn simulate_resolved(
    farm: &ResolvedFarm,
    params: &ModelParams,
    master_seed: u64,
    replicates: usize,
    mode: ExecMode,
) -> Result<Simulation> {
    if replicates == 0 {
        return Err(Error::domain("at least one replicate is required"));
    }
    let outcomes = exec::try_map_indexed(mode, replicates, |k| {
        simulate_replicate(farm, params, replicate_seed(master_seed, k as u64), ExecMode::Sequential)
    })?;
    Ok(summarize(*farm, master_seed, outcomes))
}

/// Simulate several farms with common replicate seeds. All (farm, replicate)
/// pairs are scheduled as one flat batch.
pub fn simulate_many(
    farms: &[ResolvedFarm],
    params: &ModelParams,
    master_seed: u64,
    replicates: usize,
    mode: ExecMode,
) -> Result<Vec<Simulation>> {
    params.validate()?;
    if replicates == 0 {
        return Err(Error::domain("at least one replicate is required"));
    }
    let flat = exec::try_map_indexed(mode, farms.len() * replicates, |i| {
        let (f, k) = (i / replicates, i % replicates);
        simulate_replicate(&farms[f], params, replicate_seed(master_seed, k as u64), ExecMode::Sequential)
    })?;
    let mut it = flat.into_iter();
    Ok(farms
        .iter()
        .map(|farm| summarize(*farm, master_seed, it.by_ref().take(replicates).collect()))
        .collect())
}

pub(crate) fn summarize(farm: ResolvedFarm, master_seed: u64, outcomes: Vec<ReplicateOutcome>) -> Simulation {
    let n = outcomes.len() as f64;
    let reports: Vec<EconReport> = outcomes.iter().map(|o| o.report).collect();
    let report = EconReport::mean(&reports).expect("non-empty");
    let density = outcomes.iter().map(|o| o.ecology.density).sum::<f64>() / n;
    let crop_density = outcomes.iter().map(|o| o.ecology.crop_density).sum::<f64>() / n;
    let income_se = if outcomes.len() > 1 {
        let var = reports.iter().map(|r| (r.income - report.income).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        f64::NAN
    };
    Simulation {
        farm,
        master_seed,
        report,
        density,
        crop_density,
        income_se,
        replicates: outcomes,
    }
}
