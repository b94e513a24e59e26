//! `LSC1` plain-text raster format.
//!
//! ```text
//! LSC1 <rows> <cols> <cell_area_ha>
//! <rows lines of cols space-separated cover codes>
//! <rows lines of cols space-separated field ids>
//! ```

use std::io::{BufRead, Write};

use super::{Cover, Geometry, Landscape};
use crate::error::{Error, Result};
use crate::grid::Grid;

pub fn write_raster<W: Write>(land: &Landscape, mut out: W) -> Result<()> {
    let g = land.geometry();
    writeln!(out, "LSC1 {} {} {}", g.rows, g.cols, g.cell_area)?;
    write_layer(&mut out, land.cover(), |c| c.code().to_string())?;
    write_layer(&mut out, land.field_id(), |id| id.to_string())?;
    Ok(())
}

fn write_layer<W: Write, T>(out: &mut W, grid: &Grid<T>, f: impl Fn(&T) -> String) -> Result<()> {
    for r in 0..grid.rows() {
        let line: Vec<String> = (0..grid.cols()).map(|c| f(grid.get(r, c))).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_raster<R: BufRead>(input: R) -> Result<Landscape> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty raster".into(),
    })?;
    let header = header?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || Error::Parse {
        line: 1,
        message: format!("expected `LSC1 <rows> <cols> <cell_area>`, got `{header}`"),
    };
    if parts.len() != 4 || parts[0] != "LSC1" {
        return Err(bad_header());
    }
    let rows: usize = parts[1].parse().map_err(|_| bad_header())?;
    let cols: usize = parts[2].parse().map_err(|_| bad_header())?;
    let cell_area: f64 = parts[3].parse().map_err(|_| bad_header())?;
    let geometry = Geometry {
        rows,
        cols,
        cell_area,
    };
    geometry.validate()?;

    let mut read_layer = |what: &str| -> Result<Vec<u64>> {
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (i, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                message: format!("truncated {what} layer"),
            })?;
            let line = line?;
            let row: Vec<u64> = line
                .split_whitespace()
                .map(|t| t.parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: format!("{what}: {e}"),
                })?;
            if row.len() != cols {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("{what}: expected {cols} values, got {}", row.len()),
                });
            }
            values.extend(row);
        }
        Ok(values)
    };
    let codes = read_layer("cover")?;
    let ids = read_layer("field_id")?;
    let cover = codes
        .iter()
        .map(|&c| {
            u8::try_from(c)
                .ok()
                .and_then(Cover::from_code)
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("unknown cover code {c}"),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let ids = ids
        .iter()
        .map(|&v| {
            u32::try_from(v).map_err(|_| Error::Parse {
                line: 0,
                message: format!("field id {v} out of range"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Landscape::from_parts(
        geometry,
        Grid::from_vec(rows, cols, cover),
        Grid::from_vec(rows, cols, ids),
        None,
    )
}
