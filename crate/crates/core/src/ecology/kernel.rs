use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Disc-shaped movement neighbourhood on the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    /// Radius in cell units.
    pub radius: f64,
    /// Offsets `(dr, dc)` whose centre distance is within the radius,
    /// row-major from the top-left of the bounding box.
    pub offsets: Vec<(i32, i32)>,
}

impl Kernel {
    /// All lattice offsets with `dr² + dc² ≤ radius²`.
    ///
    /// A radius below one cell degenerates to the focal cell alone.
    pub fn with_radius(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain(format!("kernel radius must be positive, got {radius}")));
        }
        if radius < 1.0 {
            log::warn!("kernel radius {radius:.3} cells is below one cell; using the focal cell only");
            return Ok(Self {
                radius,
                offsets: vec![(0, 0)],
            });
        }
        let reach = radius.floor() as i32;
        // The tolerance keeps exact lattice distances (e.g. radius 1) inside.
        let limit = radius * radius + 1e-9;
        let mut offsets = Vec::new();
        for dr in -reach..=reach {
            for dc in -reach..=reach {
                if f64::from(dr * dr + dc * dc) <= limit {
                    offsets.push((dr, dc));
                }
            }
        }
        Ok(Self { radius, offsets })
    }

    pub fn cell_count(&self) -> usize {
        self.offsets.len()
    }

    /// Area covered by the kernel in m² for a given cell area in ha.
    pub fn area_m2(&self, cell_area: f64) -> f64 {
        self.cell_count() as f64 * cell_area * 1e4
    }
}

/// Kernel whose disc has area `area` ha, on cells of `cell_area` ha.
pub fn build_kernel(area: f64, cell_area: f64) -> Result<Kernel> {
    if !(area > 0.0) || !(cell_area > 0.0) {
        return Err(Error::domain(format!(
            "movement area and cell area must be positive, got {area} and {cell_area}"
        )));
    }
    Kernel::with_radius((area / std::f64::consts::PI / cell_area).sqrt())
}

/// Kernel with a radius given in metres.
pub fn kernel_from_radius_m(radius_m: f64, cell_area: f64) -> Result<Kernel> {
    if !(cell_area > 0.0) {
        return Err(Error::domain(format!("cell area must be positive, got {cell_area}")));
    }
    Kernel::with_radius(radius_m / (cell_area * 1e4).sqrt())
}
