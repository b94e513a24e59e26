use super::LandscapeParams;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::landscape::Geometry;
use crate::rng::{label, StreamRng};

/// Number of Voronoi seeds, ⌊A / S⌋.
pub fn seed_count(geometry: &Geometry, field_size: f64) -> Result<usize> {
    let ratio = geometry.area() / field_size;
    // Guard against A/S landing a hair below an integer (400 / 4 → 99.999…).
    let n = (ratio * (1.0 + 1e-12)).floor();
    if !(n >= 1.0) {
        return Err(Error::domain(format!(
            "field size {field_size} ha exceeds the landscape area {} ha",
            geometry.area()
        )));
    }
    Ok(n as usize)
}

/// `n` points uniform on the continuous torus [0, rows) × [0, cols).
pub fn sample_seeds(n: usize, geometry: &Geometry, rng: &mut StreamRng) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            let r = rng.next_f64() * geometry.rows as f64;
            let c = rng.next_f64() * geometry.cols as f64;
            (r, c)
        })
        .collect()
}

/// Assign every cell (centre at `(r + ½, c + ½)`) to its nearest seed under
/// the toroidal Euclidean metric. Ties go to the lower seed index.
pub fn assign_voronoi(seeds: &[(f64, f64)], rows: usize, cols: usize) -> Grid<u32> {
    assert!(!seeds.is_empty(), "voronoi needs at least one seed");
    let (h, w) = (rows as f64, cols as f64);
    let torus = |d: f64, span: f64| {
        let d = d.abs();
        d.min(span - d)
    };
    Grid::from_fn(rows, cols, |r, c| {
        let (y, x) = (r as f64 + 0.5, c as f64 + 0.5);
        let mut best = 0u32;
        let mut best_d = f64::INFINITY;
        for (i, &(sr, sc)) in seeds.iter().enumerate() {
            let dy = torus(y - sr, h);
            let dx = torus(x - sc, w);
            let d = dy * dy + dx * dx;
            if d < best_d {
                best_d = d;
                best = i as u32;
            }
        }
        best
    })
}

/// Discrete Voronoi field pattern for `params`.
pub fn generate_fields(params: &LandscapeParams) -> Result<Grid<u32>> {
    params.geometry.validate()?;
    let n = seed_count(&params.geometry, params.field_size)?;
    let mut rng = StreamRng::from_seed(params.seed, label::FIELDS);
    let seeds = sample_seeds(n, &params.geometry, &mut rng);
    Ok(assign_voronoi(&seeds, params.geometry.rows, params.geometry.cols))
}
