//! Synthetic farmland rasters.
//!
//! Generation runs in three passes over a toroidal lattice: a discrete
//! Voronoi tessellation into fields, hedgerows laid on field margins, and
//! grassland laid on whole (or partial) fields. Each pass draws from its own
//! random stream so that, for a fixed seed, changing the hedgerow share does
//! not perturb the field pattern and changing the grassland share does not
//! perturb the hedgerows.

mod fields;
mod raster;
mod snh;

pub use fields::{assign_voronoi, generate_fields, sample_seeds, seed_count};
pub use raster::{read_raster, write_raster};
pub use snh::{
    field_margins, margin_cell_count, place_grassland, place_grassland_cells, place_hedgerows,
    place_hedgerows_cells, share_to_cells, Margin,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::{label, StreamRng};

/// Above this combined SNH share the scaling laws are rescaled.
pub const MAX_SNH_SHARE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Cover {
    Crop = 0,
    Hedgerow = 1,
    Grassland = 2,
}

impl Cover {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Cover::Crop),
            1 => Some(Cover::Hedgerow),
            2 => Some(Cover::Grassland),
            _ => None,
        }
    }

    /// Semi-natural habitat (hedgerow or grassland).
    pub fn is_snh(self) -> bool {
        self != Cover::Crop
    }
}

/// Lattice shape and resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub rows: usize,
    pub cols: usize,
    /// Area of one cell in ha.
    pub cell_area: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            rows: 200,
            cols: 200,
            cell_area: 0.01,
        }
    }
}

impl Geometry {
    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Total landscape area in ha.
    pub fn area(&self) -> f64 {
        self.cells() as f64 * self.cell_area
    }

    /// Side length of one cell in metres.
    pub fn cell_side_m(&self) -> f64 {
        (self.cell_area * 1e4).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::domain(format!(
                "grid must be at least 2x2, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.cell_area > 0.0 && self.cell_area.is_finite()) {
            return Err(Error::domain(format!(
                "cell area must be positive, got {}",
                self.cell_area
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeParams {
    pub geometry: Geometry,
    /// Mean field size S in ha.
    pub field_size: f64,
    /// Hedgerow share h of the total area.
    pub hedgerow_share: f64,
    /// Grassland share g of the total area.
    pub grassland_share: f64,
    pub seed: u64,
}

impl LandscapeParams {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        let (g, h) = (self.grassland_share, self.hedgerow_share);
        if !(0.0..1.0).contains(&g) || !(0.0..1.0).contains(&h) {
            return Err(Error::domain(format!(
                "shares must lie in [0,1), got g={g}, h={h}"
            )));
        }
        if g + h >= 1.0 {
            return Err(Error::domain(format!("g + h must be < 1, got {}", g + h)));
        }
        if !(self.field_size >= self.geometry.cell_area) || !self.field_size.is_finite() {
            return Err(Error::domain(format!(
                "field size {} ha is smaller than one cell ({} ha)",
                self.field_size, self.geometry.cell_area
            )));
        }
        Ok(())
    }
}

/// Power laws mapping farm size L (ha) to field size S = S₀Lᵃ,
/// grassland share g = g₀Lᵇ and hedgerow share h = h₀Lᶜ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingLaw {
    pub s0: f64,
    pub a: f64,
    pub g0: f64,
    pub b: f64,
    pub h0: f64,
    pub c: f64,
}

impl Default for ScalingLaw {
    fn default() -> Self {
        Self {
            s0: 0.4,
            a: 0.4,
            g0: 0.1,
            b: -0.2,
            h0: 0.15,
            c: -0.5,
        }
    }
}

impl ScalingLaw {
    pub fn validate(&self) -> Result<()> {
        if !(self.s0 > 0.0) {
            return Err(Error::config("scaling.s0", "must be > 0"));
        }
        if !(self.g0 > 0.0 && self.g0 < 1.0) {
            return Err(Error::config("scaling.g0", "must lie in (0,1)"));
        }
        if !(self.h0 > 0.0 && self.h0 < 1.0) {
            return Err(Error::config("scaling.h0", "must lie in (0,1)"));
        }
        if !(self.a > 0.0) {
            return Err(Error::config("scaling.a", "must be > 0"));
        }
        if !(self.b < 0.0) {
            return Err(Error::config("scaling.b", "must be < 0"));
        }
        if !(self.c < 0.0) {
            return Err(Error::config("scaling.c", "must be < 0"));
        }
        Ok(())
    }
}

/// Landscape structure implied by a farm size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarmStructure {
    pub field_size: f64,
    pub grassland_share: f64,
    pub hedgerow_share: f64,
}

/// Evaluate the farm-size scaling laws. When g + h would reach
/// [`MAX_SNH_SHARE`] both shares are scaled down proportionally.
pub fn scaling_laws(farm_size: f64, law: &ScalingLaw) -> Result<FarmStructure> {
    if !(farm_size > 0.0) || !farm_size.is_finite() {
        return Err(Error::domain(format!(
            "farm size must be positive, got {farm_size}"
        )));
    }
    let field_size = law.s0 * farm_size.powf(law.a);
    let mut g = law.g0 * farm_size.powf(law.b);
    let mut h = law.h0 * farm_size.powf(law.c);
    if g + h >= MAX_SNH_SHARE {
        let scale = MAX_SNH_SHARE / (g + h);
        g *= scale;
        h *= scale;
    }
    Ok(FarmStructure {
        field_size,
        grassland_share: g,
        hedgerow_share: h,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    geometry: Geometry,
    cover: Grid<Cover>,
    field_id: Grid<u32>,
    params: Option<LandscapeParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandscapeStats {
    pub field_count: usize,
    pub realized_h: f64,
    pub realized_g: f64,
    pub mean_field_area: f64,
}

impl Landscape {
    /// Run all three generation passes.
    pub fn generate(params: &LandscapeParams) -> Result<Self> {
        params.validate()?;
        let field_id = generate_fields(params)?;
        let mut rng = StreamRng::from_seed(params.seed, label::HEDGEROWS);
        let mut cover = place_hedgerows(&field_id, params.hedgerow_share, &mut rng)?;
        let mut rng = StreamRng::from_seed(params.seed, label::GRASSLAND);
        place_grassland(&field_id, &mut cover, params.grassland_share, &mut rng)?;
        Ok(Self {
            geometry: params.geometry,
            cover,
            field_id,
            params: Some(*params),
        })
    }

    pub fn from_parts(
        geometry: Geometry,
        cover: Grid<Cover>,
        field_id: Grid<u32>,
        params: Option<LandscapeParams>,
    ) -> Result<Self> {
        geometry.validate()?;
        let shape_ok = |r: usize, c: usize| r == geometry.rows && c == geometry.cols;
        if !shape_ok(cover.rows(), cover.cols()) || !shape_ok(field_id.rows(), field_id.cols()) {
            return Err(Error::domain("cover/field grids do not match geometry"));
        }
        Ok(Self {
            geometry,
            cover,
            field_id,
            params,
        })
    }

    /// A landscape of a single land-cover type and a single field.
    pub fn uniform(geometry: Geometry, cover: Cover) -> Self {
        Self {
            geometry,
            cover: Grid::filled(geometry.rows, geometry.cols, cover),
            field_id: Grid::filled(geometry.rows, geometry.cols, 0),
            params: None,
        }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn cover(&self) -> &Grid<Cover> {
        &self.cover
    }

    pub fn field_id(&self) -> &Grid<u32> {
        &self.field_id
    }

    pub fn params(&self) -> Option<&LandscapeParams> {
        self.params.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.params.map_or(0, |p| p.seed)
    }

    pub fn count(&self, kind: Cover) -> usize {
        self.cover.iter().filter(|&&c| c == kind).count()
    }

    pub fn stats(&self) -> LandscapeStats {
        let mut present: Vec<u32> = self.field_id.iter().copied().collect();
        present.sort_unstable();
        present.dedup();
        let n = self.geometry.cells() as f64;
        let area = self.geometry.area();
        LandscapeStats {
            field_count: present.len(),
            realized_h: self.count(Cover::Hedgerow) as f64 / n,
            realized_g: self.count(Cover::Grassland) as f64 / n,
            mean_field_area: area / present.len() as f64,
        }
    }

    /// Cyclic translation of both layers.
    pub fn rolled(&self, dr: isize, dc: isize) -> Self {
        Self {
            geometry: self.geometry,
            cover: self.cover.rolled(dr, dc),
            field_id: self.field_id.rolled(dr, dc),
            params: self.params,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: f64, h: f64, g: f64, seed: u64) -> LandscapeParams {
        LandscapeParams {
            geometry: Geometry::default(),
            field_size: s,
            hedgerow_share: h,
            grassland_share: g,
            seed,
        }
    }

    #[test]
    fn scaling_laws_at_one_hectare_return_the_scales() {
        let f = scaling_laws(1.0, &ScalingLaw::default()).unwrap();
        assert_eq!((f.field_size, f.grassland_share, f.hedgerow_share), (0.4, 0.1, 0.15));
    }

    #[test]
    fn scaling_laws_reference_points() {
        let law = ScalingLaw::default();
        // Oracle: direct evaluation, 25^0.4 = e^{0.4 ln 25}.
        let f = scaling_laws(25.0, &law).unwrap();
        assert!((f.field_size - 1.449_5).abs() < 1e-4);
        assert!((f.grassland_share - 0.052_5).abs() < 1e-4);
        assert!((f.hedgerow_share - 0.03).abs() < 1e-12);
        let f = scaling_laws(100.0, &law).unwrap();
        assert!((f.field_size - 2.524).abs() < 1e-3);
        assert!((f.grassland_share - 0.039_8).abs() < 1e-4);
        assert!((f.hedgerow_share - 0.015).abs() < 1e-12);
    }

    #[test]
    fn scaling_laws_reject_non_positive_size() {
        assert!(matches!(scaling_laws(0.0, &ScalingLaw::default()), Err(Error::Domain(_))));
        assert!(scaling_laws(-3.0, &ScalingLaw::default()).is_err());
    }

    #[test]
    fn scaling_laws_clamp_tiny_farms() {
        let f = scaling_laws(1e-4, &ScalingLaw::default()).unwrap();
        assert!(f.grassland_share + f.hedgerow_share < 1.0);
        assert!((f.grassland_share + f.hedgerow_share - MAX_SNH_SHARE).abs() < 1e-12);
    }

    #[test]
    fn shares_are_realized_exactly() {
        let land = Landscape::generate(&params(4.0, 0.05, 0.05, 11)).unwrap();
        assert_eq!(land.count(Cover::Crop), 36_000);
        assert_eq!(land.count(Cover::Hedgerow), 2_000);
        assert_eq!(land.count(Cover::Grassland), 2_000);
        let st = land.stats();
        assert!((st.realized_h - 0.05).abs() <= 0.01 / 400.0);
        assert!((st.mean_field_area - 400.0 / st.field_count as f64).abs() < 1e-12);
    }

    #[test]
    fn zero_shares_leave_pure_cropland() {
        let land = Landscape::generate(&params(4.0, 0.0, 0.0, 3)).unwrap();
        assert_eq!(land.count(Cover::Crop), 40_000);
        assert_eq!(land.stats().field_count, 100);
    }

    #[test]
    fn single_field_cannot_host_hedgerows() {
        let err = Landscape::generate(&params(400.0, 0.01, 0.0, 1)).unwrap_err();
        assert!(matches!(
            err,
            Error::InfeasibleShare { kind: "hedgerow", deficit: 400, .. }
        ));
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(2.5, 0.04, 0.06, 77);
        assert_eq!(Landscape::generate(&p).unwrap(), Landscape::generate(&p).unwrap());
        let q = params(2.5, 0.04, 0.06, 78);
        assert_ne!(Landscape::generate(&p).unwrap(), Landscape::generate(&q).unwrap());
    }

    #[test]
    fn hedgerow_share_does_not_move_fields() {
        let a = Landscape::generate(&params(2.0, 0.02, 0.05, 9)).unwrap();
        let b = Landscape::generate(&params(2.0, 0.06, 0.05, 9)).unwrap();
        assert_eq!(a.field_id(), b.field_id());
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(params(4.0, 0.6, 0.5, 0).validate().is_err());
        assert!(params(0.001, 0.0, 0.0, 0).validate().is_err());
        let mut p = params(4.0, 0.0, 0.0, 0);
        p.geometry.rows = 1;
        assert!(p.validate().is_err());
    }
}
