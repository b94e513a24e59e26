//! Seasonal natural-enemy dynamics on a landscape.
//!
//! Each year has a summer of logistic growth with an extra pesticide
//! mortality, followed by a winter in which a habitat-dependent fraction
//! survives. Capacities, mortalities and survival fractions are frozen for the
//! whole run, so summer growth uses the exact solution of the logistic ODE.

mod kernel;

pub use kernel::{build_kernel, kernel_from_radius_m, Kernel};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::grid::{periodic_sum, Grid};
use crate::landscape::{Cover, Landscape};
use crate::table::{num, Table};

/// How the amount of overwintering habitat around a cell is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SnhMeasure {
    /// Number of habitat cells in the kernel.
    #[default]
    Cells,
    /// Habitat area in the kernel in ha.
    Hectares,
}

/// Denominator used to turn per-cell abundance into an areal density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DensityNorm {
    /// Kernel area: abundance is a kernel-supported stock.
    #[default]
    Kernel,
    /// Single cell area.
    Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EcologyParams {
    /// Intrinsic growth rate per day.
    pub growth_rate: f64,
    /// Maximum density in semi-natural habitat, individuals per ha.
    pub snh_capacity: f64,
    /// Maximum density in untreated cropland, individuals per ha.
    pub crop_capacity: f64,
    /// Pesticide expenditure at which effects reach half strength, €/ha/yr.
    pub pesticide_ref: f64,
    /// Pesticide selectivity in [0, 1]; 1 spares natural enemies entirely.
    pub selectivity: f64,
    /// Area of the annual movement disc in ha.
    pub movement_area: f64,
    /// Overrides the radius derived from `movement_area`.
    pub kernel_radius_m: Option<f64>,
    /// Habitat amount at which winter survival is one half.
    pub overwinter_ref: f64,
    pub snh_measure: SnhMeasure,
    pub season_days: f64,
    pub years: u32,
    /// Initial abundance as a fraction of carrying capacity.
    pub initial_fraction: f64,
    pub density_norm: DensityNorm,
}

impl Default for EcologyParams {
    fn default() -> Self {
        Self {
            growth_rate: 0.01,
            snh_capacity: 5000.0,
            crop_capacity: 10000.0,
            pesticide_ref: 80.0,
            selectivity: 0.0,
            movement_area: 0.2,
            kernel_radius_m: None,
            overwinter_ref: 0.5,
            snh_measure: SnhMeasure::Cells,
            season_days: 180.0,
            years: 10,
            initial_fraction: 0.1,
            density_norm: DensityNorm::Kernel,
        }
    }
}

impl EcologyParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ecology.growth_rate", self.growth_rate),
            ("ecology.snh_capacity", self.snh_capacity),
            ("ecology.crop_capacity", self.crop_capacity),
            ("ecology.pesticide_ref", self.pesticide_ref),
            ("ecology.movement_area", self.movement_area),
            ("ecology.overwinter_ref", self.overwinter_ref),
            ("ecology.season_days", self.season_days),
            ("ecology.initial_fraction", self.initial_fraction),
        ];
        for (key, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(key, format!("must be a positive number, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.selectivity) {
            return Err(Error::config(
                "ecology.selectivity",
                format!("must lie in [0,1], got {}", self.selectivity),
            ));
        }
        if let Some(r) = self.kernel_radius_m {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::config("ecology.kernel_radius_m", "must be positive"));
            }
        }
        if self.years == 0 {
            return Err(Error::config("ecology.years", "must be at least 1"));
        }
        Ok(())
    }

    /// Maximum pesticide mortality per day.
    pub fn max_mortality(&self) -> f64 {
        (1.0 - self.selectivity) * self.growth_rate
    }

    pub fn kernel(&self, cell_area: f64) -> Result<Kernel> {
        match self.kernel_radius_m {
            Some(r) => kernel_from_radius_m(r, cell_area),
            None => build_kernel(self.movement_area, cell_area),
        }
    }
}

/// Saturating response `1 / (1 + x/y)`.
pub fn response(x: f64, y: f64) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain(format!("response scale must be positive, got {y}")));
    }
    Ok(response_unchecked(x, y))
}

#[inline]
pub(crate) fn response_unchecked(x: f64, y: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else {
        1.0 / (1.0 + x / y)
    }
}

/// Per-cell capacity before kernel summation.
fn local_capacity(land: &Landscape, pesticide: f64, p: &EcologyParams) -> Grid<f64> {
    let area = land.geometry().cell_area;
    let snh = p.snh_capacity * area;
    let crop = p.crop_capacity * area * response_unchecked(pesticide, p.pesticide_ref);
    land.cover().map(|c| if c.is_snh() { snh } else { crop })
}

/// Kernel-summed carrying capacity of every cell (individuals).
pub fn carrying_capacity_field(
    land: &Landscape,
    kernel: &Kernel,
    pesticide: f64,
    p: &EcologyParams,
    mode: ExecMode,
) -> Grid<f64> {
    periodic_sum(&local_capacity(land, pesticide, p), &kernel.offsets, mode)
}

/// Extra daily mortality from pesticide applied within the kernel.
pub fn mortality_field(
    land: &Landscape,
    kernel: &Kernel,
    pesticide: f64,
    p: &EcologyParams,
    mode: ExecMode,
) -> Grid<f64> {
    let applied = land.cover().map(|c| if c.is_snh() { 0.0 } else { pesticide });
    let exposure = periodic_sum(&applied, &kernel.offsets, mode);
    let cap = p.max_mortality();
    exposure.map(|&t| {
        if t > 0.0 {
            cap * response_unchecked(p.pesticide_ref, t)
        } else {
            0.0
        }
    })
}

/// Winter survival fraction of every cell.
pub fn survival_field(land: &Landscape, kernel: &Kernel, p: &EcologyParams, mode: ExecMode) -> Grid<f64> {
    let unit = match p.snh_measure {
        SnhMeasure::Cells => 1.0,
        SnhMeasure::Hectares => land.geometry().cell_area,
    };
    let habitat = land.cover().map(|c| if c.is_snh() { unit } else { 0.0 });
    let amount = periodic_sum(&habitat, &kernel.offsets, mode);
    amount.map(|&a| if a > 0.0 { a / (a + p.overwinter_ref) } else { 0.0 })
}

/// Apply winter survival cell by cell.
pub fn winter_survival(summer: &Grid<f64>, survival: &Grid<f64>) -> Grid<f64> {
    Grid::from_vec(
        summer.rows(),
        summer.cols(),
        summer.iter().zip(survival.iter()).map(|(n, s)| n * s).collect(),
    )
}

/// Abundance after `days` of logistic growth at rate `r` towards `capacity`
/// with extra mortality `mortality`.
pub fn summer_growth(start: f64, capacity: f64, mortality: f64, r: f64, days: f64) -> Result<f64> {
    if !(capacity > 0.0) {
        return Err(Error::domain(format!("carrying capacity must be positive, got {capacity}")));
    }
    if !(start >= 0.0) {
        return Err(Error::domain(format!("abundance must be non-negative, got {start}")));
    }
    Ok(logistic_end(start, capacity, mortality, r, days))
}

/// Exact logistic solution written as
/// `N₀e^{r'T} / (1 + (r N₀/k)(e^{r'T} − 1)/r')`, which stays finite and
/// non-negative for any sign of `r' = r − m` and reduces continuously to the
/// `r' = 0` case.
#[inline]
fn logistic_end(start: f64, capacity: f64, mortality: f64, r: f64, days: f64) -> f64 {
    if start <= 0.0 || capacity <= 0.0 {
        return 0.0;
    }
    let net = r - mortality;
    let x = net * days;
    let growth = x.exp();
    let integral = if net == 0.0 { days } else { x.exp_m1() / net };
    start * growth / (1.0 + r * start / capacity * integral)
}

/// Per-cell state at the end of the last simulated summer.
#[derive(Debug, Clone, PartialEq)]
pub struct NeField {
    /// End-of-summer abundance (individuals per cell).
    pub abundance: Grid<f64>,
    pub capacity: Grid<f64>,
    pub mortality: Grid<f64>,
    pub survival: Grid<f64>,
    pub years: u32,
    pub pesticide: f64,
    pub kernel_cells: usize,
    /// Area used to convert abundance into a density, in m².
    pub density_area_m2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    /// Mean density over all cells, individuals per m².
    pub mean_density_m2: f64,
    /// Mean density over crop cells only (NaN without cropland).
    pub crop_density_m2: f64,
    #[serde(rename = "total_N")]
    pub total_n: f64,
    pub years: u32,
    pub seed: u64,
}

/// Simulate `p.years` seasons starting from `initial_fraction · k`.
pub fn run_to_equilibrium(
    land: &Landscape,
    pesticide: f64,
    p: &EcologyParams,
    mode: ExecMode,
) -> Result<(NeField, EquilibriumSummary)> {
    p.validate()?;
    if !(pesticide >= 0.0) {
        return Err(Error::domain(format!("pesticide expenditure must be non-negative, got {pesticide}")));
    }
    let geom = land.geometry();
    let kernel = p.kernel(geom.cell_area)?;
    let capacity = carrying_capacity_field(land, &kernel, pesticide, p, mode);
    let mortality = mortality_field(land, &kernel, pesticide, p, mode);
    let survival = survival_field(land, &kernel, p, mode);
    let init = initial_state(&capacity, p);
    let abundance = iterate_years(init, &capacity, &mortality, &survival, p, mode);
    let density_area_m2 = match p.density_norm {
        DensityNorm::Kernel => kernel.area_m2(geom.cell_area),
        DensityNorm::Cell => geom.cell_area * 1e4,
    };
    let field = NeField {
        abundance,
        capacity,
        mortality,
        survival,
        years: p.years,
        pesticide,
        kernel_cells: kernel.cell_count(),
        density_area_m2,
    };
    let summary = field.summary(land);
    Ok((field, summary))
}

pub(crate) fn initial_state(capacity: &Grid<f64>, p: &EcologyParams) -> Grid<f64> {
    capacity.map(|k| p.initial_fraction * k)
}

/// Run the summer/winter cycle; returns the abundance at the end of the last
/// summer.
pub(crate) fn iterate_years(
    mut spring: Grid<f64>,
    capacity: &Grid<f64>,
    mortality: &Grid<f64>,
    survival: &Grid<f64>,
    p: &EcologyParams,
    mode: ExecMode,
) -> Grid<f64> {
    let cols = spring.cols();
    let (k, m, s) = (capacity.as_slice(), mortality.as_slice(), survival.as_slice());
    let (r, days) = (p.growth_rate, p.season_days);
    for year in 0..p.years {
        let last = year + 1 == p.years;
        exec::for_each_row(mode, spring.as_mut_slice(), cols, |row, cells| {
            let base = row * cols;
            for (j, n) in cells.iter_mut().enumerate() {
                let i = base + j;
                let summer = logistic_end(*n, k[i], m[i], r, days);
                *n = if last { summer } else { summer * s[i] };
            }
        });
    }
    spring
}

impl NeField {
    pub fn density(&self, n: f64) -> f64 {
        n / self.density_area_m2
    }

    pub fn summary(&self, land: &Landscape) -> EquilibriumSummary {
        let total: f64 = self.abundance.iter().sum();
        let cells = self.abundance.len() as f64;
        let (crop_sum, crop_n) = self
            .abundance
            .iter()
            .zip(land.cover().iter())
            .filter(|(_, c)| **c == Cover::Crop)
            .fold((0.0, 0usize), |(s, n), (x, _)| (s + x, n + 1));
        let crop_mean = if crop_n > 0 { crop_sum / crop_n as f64 } else { f64::NAN };
        EquilibriumSummary {
            mean_density_m2: self.density(total / cells),
            crop_density_m2: self.density(crop_mean),
            total_n: total,
            years: self.years,
            seed: land.seed(),
        }
    }

    /// Per-cell table with columns `row,col,cover,field_id,k,m,s,N_summer`.
    pub fn to_table(&self, land: &Landscape) -> Table {
        let mut t = Table::new(&["row", "col", "cover", "field_id", "k", "m", "s", "N_summer"]);
        let cover = land.cover();
        let ids = land.field_id();
        for i in 0..self.abundance.len() {
            let (r, c) = cover.coords(i);
            t.push(vec![
                r.to_string(),
                c.to_string(),
                cover[i].code().to_string(),
                ids[i].to_string(),
                num(self.capacity[i]),
                num(self.mortality[i]),
                num(self.survival[i]),
                num(self.abundance[i]),
            ]);
        }
        t
    }

    pub fn write_csv<W: Write>(&self, land: &Landscape, out: W) -> Result<()> {
        self.to_table(land).write(out)
    }
}
