//! Farm-level yields, costs, profit, labor and income.

use serde::{Deserialize, Serialize};

use crate::ecology::{response_unchecked, EcologyParams, NeField};
use crate::error::{Error, Result};
use crate::landscape::{Cover, Landscape};
use crate::table::num;

/// Direction of the fertiliser yield term with farm size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum YieldForm {
    /// `y₁ · L / (L + L_ref)`: larger farms use more inputs.
    #[default]
    Increasing,
    /// `y₁ · L_ref / (L + L_ref)`.
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EconParams {
    /// Baseline yield, q/ha.
    pub base_yield: f64,
    /// Maximum additional yield from fertiliser, q/ha.
    pub fertilizer_yield: f64,
    /// Farm size at which the fertiliser gain is half realised, ha.
    pub yield_ref_size: f64,
    pub yield_form: YieldForm,
    /// Largest fraction of yield pests can destroy.
    pub max_pest_loss: f64,
    /// Asymptotic crop-protection expenditure, €/ha/yr.
    pub cpe_max: f64,
    /// Farm size at which expenditure is half of `cpe_max`, ha.
    pub cpe_ref_size: f64,
    /// Operating costs excluding pesticide, €/ha/yr.
    pub operating_cost: f64,
    pub grassland_cost: f64,
    pub hedgerow_cost: f64,
    /// Crop price, €/q.
    pub price: f64,
    /// Asymptotic labor input, AWU/ha.
    pub labor_base: f64,
    /// Additional labor on small farms with small fields, AWU/ha.
    pub labor_extra: f64,
    pub labor_ref_size: f64,
    pub field_ref_size: f64,
    /// Net subsidy, €/ha/yr.
    pub subsidy: f64,
}

impl Default for EconParams {
    fn default() -> Self {
        Self {
            base_yield: 51.0,
            fertilizer_yield: 18.0,
            yield_ref_size: 25.0,
            yield_form: YieldForm::Increasing,
            max_pest_loss: 0.3,
            cpe_max: 120.0,
            cpe_ref_size: 25.0,
            operating_cost: 750.0,
            grassland_cost: 250.0,
            hedgerow_cost: 1000.0,
            price: 15.0,
            labor_base: 0.01,
            labor_extra: 0.6,
            labor_ref_size: 5.0,
            field_ref_size: 1.0,
            subsidy: 500.0,
        }
    }
}

impl EconParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("economics.base_yield", self.base_yield),
            ("economics.yield_ref_size", self.yield_ref_size),
            ("economics.cpe_max", self.cpe_max),
            ("economics.cpe_ref_size", self.cpe_ref_size),
            ("economics.operating_cost", self.operating_cost),
            ("economics.grassland_cost", self.grassland_cost),
            ("economics.hedgerow_cost", self.hedgerow_cost),
            ("economics.price", self.price),
            ("economics.labor_base", self.labor_base),
            ("economics.labor_extra", self.labor_extra),
            ("economics.labor_ref_size", self.labor_ref_size),
            ("economics.field_ref_size", self.field_ref_size),
        ];
        for (key, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(key, format!("must be a positive number, got {v}")));
            }
        }
        let non_negative = [
            ("economics.fertilizer_yield", self.fertilizer_yield),
            ("economics.subsidy", self.subsidy),
        ];
        for (key, v) in non_negative {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(key, format!("must be non-negative, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.max_pest_loss) {
            return Err(Error::config("economics.max_pest_loss", "must lie in [0,1]"));
        }
        Ok(())
    }

    /// Fraction of the fertiliser gain realised at farm size `farm_size`.
    pub fn fertilizer_factor(&self, farm_size: f64) -> f64 {
        match self.yield_form {
            YieldForm::Increasing => response_unchecked(self.yield_ref_size, farm_size),
            YieldForm::Decreasing => response_unchecked(farm_size, self.yield_ref_size),
        }
    }

    /// Pest-free yield, q/ha.
    pub fn max_yield(&self, farm_size: f64) -> f64 {
        self.base_yield + self.fertilizer_yield * self.fertilizer_factor(farm_size)
    }
}

/// Crop-protection expenditure of a farm of `farm_size` ha, €/ha/yr.
pub fn pesticide_intensity(farm_size: f64, p: &EconParams) -> Result<f64> {
    if !(farm_size > 0.0) {
        return Err(Error::domain(format!("farm size must be positive, got {farm_size}")));
    }
    Ok(p.cpe_max * response_unchecked(p.cpe_ref_size, farm_size))
}

/// Fraction of the maximum pest loss realised in a cell with `abundance`
/// natural enemies, where `saturated` is the kernel capacity of untreated
/// cropland.
pub fn pest_damage(abundance: f64, pesticide: f64, saturated: f64, pesticide_ref: f64) -> Result<f64> {
    if !(saturated > 0.0) {
        return Err(Error::domain(format!("crop capacity must be positive, got {saturated}")));
    }
    if !(pesticide_ref > 0.0) {
        return Err(Error::domain(format!("reference pesticide must be positive, got {pesticide_ref}")));
    }
    Ok(damage_unchecked(abundance, pesticide, saturated, pesticide_ref))
}

#[inline]
fn damage_unchecked(abundance: f64, pesticide: f64, saturated: f64, pesticide_ref: f64) -> f64 {
    (response_unchecked(pesticide, pesticide_ref) - abundance / saturated).clamp(0.0, 1.0)
}

/// Yield of a crop cell, q/ha.
pub fn cell_yield(farm_size: f64, damage: f64, p: &EconParams) -> f64 {
    p.max_yield(farm_size) * (1.0 - p.max_pest_loss * damage)
}

/// Labor input of `productive` ha farmed in fields of `field_size` ha, AWU.
pub fn labor(productive: f64, field_size: f64, p: &EconParams) -> f64 {
    productive
        * (p.labor_base
            + p.labor_extra
                * response_unchecked(productive, p.labor_ref_size)
                * response_unchecked(field_size, p.field_ref_size))
}

/// Crop-cell pest damage averaged over cropland.
pub fn mean_crop_damage(land: &Landscape, ne: &NeField, eco: &EcologyParams) -> Result<f64> {
    let saturated = eco.crop_capacity * land.geometry().cell_area * ne.kernel_cells as f64;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (cover, &abundance) in land.cover().iter().zip(ne.abundance.iter()) {
        if *cover == Cover::Crop {
            sum += pest_damage(abundance, ne.pesticide, saturated, eco.pesticide_ref)?;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::domain("landscape has no cropland"));
    }
    Ok(sum / n as f64)
}

/// Mean yield over crop cells, q/ha.
pub fn mean_crop_yield(
    land: &Landscape,
    ne: &NeField,
    farm_size: f64,
    eco: &EcologyParams,
    econ: &EconParams,
) -> Result<f64> {
    let saturated = eco.crop_capacity * land.geometry().cell_area * ne.kernel_cells as f64;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (cover, &abundance) in land.cover().iter().zip(ne.abundance.iter()) {
        if *cover == Cover::Crop {
            let d = pest_damage(abundance, ne.pesticide, saturated, eco.pesticide_ref)?;
            sum += cell_yield(farm_size, d, econ);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::domain("landscape has no cropland"));
    }
    Ok(sum / n as f64)
}

/// Inputs of a farm's annual account.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarmInputs {
    pub mean_yield: f64,
    pub farm_size: f64,
    pub grassland_share: f64,
    pub hedgerow_share: f64,
    pub field_size: f64,
    pub pesticide: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconReport {
    pub farm_size: f64,
    pub field_size: f64,
    pub grassland_share: f64,
    pub hedgerow_share: f64,
    pub pesticide: f64,
    pub mean_yield: f64,
    pub production: f64,
    pub revenue: f64,
    pub costs: f64,
    pub profit: f64,
    pub labor: f64,
    pub income: f64,
    pub productive_area: f64,
    pub pesticide_cost: f64,
}

impl EconReport {
    pub const HEADER: [&'static str; 12] = [
        "L", "S", "g", "h", "pi", "ybar", "production", "revenue", "costs", "profit", "labor", "income",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        [
            self.farm_size,
            self.field_size,
            self.grassland_share,
            self.hedgerow_share,
            self.pesticide,
            self.mean_yield,
            self.production,
            self.revenue,
            self.costs,
            self.profit,
            self.labor,
            self.income,
        ]
        .into_iter()
        .map(num)
        .collect()
    }

    /// Field-wise arithmetic mean of several reports.
    pub fn mean(reports: &[EconReport]) -> Option<EconReport> {
        let n = reports.len();
        if n == 0 {
            return None;
        }
        let avg = |f: fn(&EconReport) -> f64| reports.iter().map(f).sum::<f64>() / n as f64;
        Some(EconReport {
            farm_size: avg(|r| r.farm_size),
            field_size: avg(|r| r.field_size),
            grassland_share: avg(|r| r.grassland_share),
            hedgerow_share: avg(|r| r.hedgerow_share),
            pesticide: avg(|r| r.pesticide),
            mean_yield: avg(|r| r.mean_yield),
            production: avg(|r| r.production),
            revenue: avg(|r| r.revenue),
            costs: avg(|r| r.costs),
            profit: avg(|r| r.profit),
            labor: avg(|r| r.labor),
            income: avg(|r| r.income),
            productive_area: avg(|r| r.productive_area),
            pesticide_cost: avg(|r| r.pesticide_cost),
        })
    }
}

/// Production, costs, profit, labor and income of one farm-year.
pub fn farm_account(inp: &FarmInputs, p: &EconParams) -> Result<EconReport> {
    let FarmInputs {
        mean_yield,
        farm_size,
        grassland_share: g,
        hedgerow_share: h,
        field_size,
        pesticide,
    } = *inp;
    if !(farm_size > 0.0) {
        return Err(Error::domain(format!("farm size must be positive, got {farm_size}")));
    }
    if !(g >= 0.0 && h >= 0.0 && g + h < 1.0) {
        return Err(Error::domain(format!("invalid shares g={g}, h={h}")));
    }
    if !(mean_yield >= 0.0) || !(pesticide >= 0.0) || !(field_size > 0.0) {
        return Err(Error::domain("yield, pesticide and field size must be non-negative"));
    }
    let productive = farm_size * (1.0 - g - h);
    let production = productive * mean_yield;
    let revenue = p.price * production;
    let pesticide_cost = pesticide * productive;
    let costs = (p.operating_cost + pesticide) * productive
        + p.grassland_cost * farm_size * g
        + p.hedgerow_cost * farm_size * h;
    let profit = revenue - costs + farm_size * p.subsidy;
    let work = labor(productive, field_size, p);
    if !(work > 0.0) {
        return Err(Error::IncomeUndefined);
    }
    Ok(EconReport {
        farm_size,
        field_size,
        grassland_share: g,
        hedgerow_share: h,
        pesticide,
        mean_yield,
        production,
        revenue,
        costs,
        profit,
        labor: work,
        income: profit / work,
        productive_area: productive,
        pesticide_cost,
    })
}
