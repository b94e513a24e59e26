//! Hedgerow and grassland placement.

use std::collections::{BTreeMap, HashSet, VecDeque};

use super::Cover;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::StreamRng;

/// The boundary between two adjacent fields, one cell thick.
///
/// A margin cell is a cell of field `a` with an edge neighbour in a field
/// `b > a`; it belongs to the margin `(a, b_min)` where `b_min` is its
/// smallest such neighbour. Boundaries are therefore realised on the
/// lower-id side only. Cells are listed in raster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Margin {
    pub fields: (u32, u32),
    pub cells: Vec<usize>,
}

pub fn field_margins(field_id: &Grid<u32>) -> Vec<Margin> {
    let mut by_pair: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
    for idx in 0..field_id.len() {
        let a = field_id[idx];
        let other = field_id
            .neighbors4(idx)
            .iter()
            .map(|&n| field_id[n])
            .filter(|&b| b > a)
            .min();
        if let Some(b) = other {
            by_pair.entry((a, b)).or_default().push(idx);
        }
    }
    by_pair
        .into_iter()
        .map(|(fields, cells)| Margin { fields, cells })
        .collect()
}

pub fn margin_cell_count(field_id: &Grid<u32>) -> usize {
    field_margins(field_id).iter().map(|m| m.cells.len()).sum()
}

/// Whole-cell budget for an area share, rounding half up.
pub fn share_to_cells(share: f64, cells: usize) -> usize {
    (share * cells as f64 + 0.5).floor().max(0.0) as usize
}

/// Up to `budget` cells of `members`, grown breadth-first from
/// `members[start]`. If the connected component runs out, growth restarts at
/// the first unvisited member in list order.
fn contiguous_take<T>(
    grid: &Grid<T>,
    members: &[usize],
    budget: usize,
    start: usize,
    diagonal: bool,
) -> Vec<usize> {
    let member: HashSet<usize> = members.iter().copied().collect();
    let mut seen: HashSet<usize> = HashSet::with_capacity(budget * 2);
    let mut taken = Vec::with_capacity(budget);
    let mut queue = VecDeque::new();
    let mut next_unvisited = 0usize;
    let mut seed = Some(members[start]);
    while taken.len() < budget {
        let root = match seed.take() {
            Some(r) => r,
            None => {
                while next_unvisited < members.len() && seen.contains(&members[next_unvisited]) {
                    next_unvisited += 1;
                }
                match members.get(next_unvisited) {
                    Some(&r) => r,
                    None => break,
                }
            }
        };
        seen.insert(root);
        queue.push_back(root);
        while let Some(cell) = queue.pop_front() {
            taken.push(cell);
            if taken.len() == budget {
                break;
            }
            let n8 = grid.neighbors8(cell);
            let neigh = if diagonal { &n8[..] } else { &n8[..4] };
            for &n in neigh {
                if member.contains(&n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        queue.clear();
    }
    taken
}

/// Convert field margins to hedgerow until the share `h` of the raster is
/// reached exactly (in whole cells).
pub fn place_hedgerows(field_id: &Grid<u32>, h: f64, rng: &mut StreamRng) -> Result<Grid<Cover>> {
    place_hedgerows_cells(field_id, share_to_cells(h, field_id.len()), rng)
}

/// Margins are visited in random order; each is converted wholly while the
/// budget allows, then a contiguous run of the next one closes the budget.
pub fn place_hedgerows_cells(
    field_id: &Grid<u32>,
    budget: usize,
    rng: &mut StreamRng,
) -> Result<Grid<Cover>> {
    let mut cover = Grid::filled(field_id.rows(), field_id.cols(), Cover::Crop);
    if budget == 0 {
        return Ok(cover);
    }
    let mut margins = field_margins(field_id);
    let available: usize = margins.iter().map(|m| m.cells.len()).sum();
    if available < budget {
        return Err(Error::InfeasibleShare {
            kind: "hedgerow",
            requested: budget,
            available,
            deficit: budget - available,
        });
    }
    rng.shuffle(&mut margins);
    let mut remaining = budget;
    for margin in &margins {
        if remaining == 0 {
            break;
        }
        if margin.cells.len() <= remaining {
            for &c in &margin.cells {
                cover[c] = Cover::Hedgerow;
            }
            remaining -= margin.cells.len();
        } else {
            let start = rng.below(margin.cells.len() as u64) as usize;
            for c in contiguous_take(field_id, &margin.cells, remaining, start, true) {
                cover[c] = Cover::Hedgerow;
            }
            remaining = 0;
        }
    }
    debug_assert_eq!(remaining, 0);
    Ok(cover)
}

/// Convert crop fields to grassland until the share `g` is reached.
pub fn place_grassland(
    field_id: &Grid<u32>,
    cover: &mut Grid<Cover>,
    g: f64,
    rng: &mut StreamRng,
) -> Result<()> {
    place_grassland_cells(field_id, cover, share_to_cells(g, field_id.len()), rng)
}

/// Fields are visited in random order and their remaining crop cells
/// converted wholly while the budget allows; a contiguous part of the next
/// field closes the budget. Hedgerow cells are never overwritten.
pub fn place_grassland_cells(
    field_id: &Grid<u32>,
    cover: &mut Grid<Cover>,
    budget: usize,
    rng: &mut StreamRng,
) -> Result<()> {
    if budget == 0 {
        return Ok(());
    }
    let field_count = field_id.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut crop_cells: Vec<Vec<usize>> = vec![Vec::new(); field_count];
    for idx in 0..field_id.len() {
        if cover[idx] == Cover::Crop {
            crop_cells[field_id[idx] as usize].push(idx);
        }
    }
    let available: usize = crop_cells.iter().map(Vec::len).sum();
    if available < budget {
        return Err(Error::InfeasibleShare {
            kind: "grassland",
            requested: budget,
            available,
            deficit: budget - available,
        });
    }
    let mut order: Vec<usize> = (0..field_count).collect();
    rng.shuffle(&mut order);
    let mut remaining = budget;
    for f in order {
        if remaining == 0 {
            break;
        }
        let cells = &crop_cells[f];
        if cells.is_empty() {
            continue;
        }
        if cells.len() <= remaining {
            for &c in cells {
                cover[c] = Cover::Grassland;
            }
            remaining -= cells.len();
        } else {
            let start = rng.below(cells.len() as u64) as usize;
            for c in contiguous_take(field_id, cells, remaining, start, false) {
                cover[c] = Cover::Grassland;
            }
            remaining = 0;
        }
    }
    debug_assert_eq!(remaining, 0);
    Ok(())
}
