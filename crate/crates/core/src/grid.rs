//! Toroidal rasters and neighbourhood sums.

use crate::exec::{self, ExecMode};

/// Dense row-major raster on a torus.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "grid data length mismatch");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.cols, idx % self.cols)
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: T) {
        let i = self.index(r, c);
        self.data[i] = value;
    }

    /// Index of the cell at `(r + dr, c + dc)` with periodic wrap.
    #[inline]
    pub fn offset(&self, idx: usize, dr: isize, dc: isize) -> usize {
        let (r, c) = self.coords(idx);
        let rr = (r as isize + dr).rem_euclid(self.rows as isize) as usize;
        let cc = (c as isize + dc).rem_euclid(self.cols as isize) as usize;
        rr * self.cols + cc
    }

    /// The four edge neighbours (up, down, left, right).
    #[inline]
    pub fn neighbors4(&self, idx: usize) -> [usize; 4] {
        [
            self.offset(idx, -1, 0),
            self.offset(idx, 1, 0),
            self.offset(idx, 0, -1),
            self.offset(idx, 0, 1),
        ]
    }

    /// The eight neighbours, edge neighbours first.
    #[inline]
    pub fn neighbors8(&self, idx: usize) -> [usize; 8] {
        [
            self.offset(idx, -1, 0),
            self.offset(idx, 1, 0),
            self.offset(idx, 0, -1),
            self.offset(idx, 0, 1),
            self.offset(idx, -1, -1),
            self.offset(idx, -1, 1),
            self.offset(idx, 1, -1),
            self.offset(idx, 1, 1),
        ]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Cyclic shift: the value at `(r, c)` moves to `(r + dr, c + dc)`.
    pub fn rolled(&self, dr: isize, dc: isize) -> Self
    where
        T: Clone,
    {
        Grid::from_fn(self.rows, self.cols, |r, c| {
            let sr = (r as isize - dr).rem_euclid(self.rows as isize) as usize;
            let sc = (c as isize - dc).rem_euclid(self.cols as isize) as usize;
            self.get(sr, sc).clone()
        })
    }
}

impl<T> std::ops::Index<usize> for Grid<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T> std::ops::IndexMut<usize> for Grid<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.data[i]
    }
}

/// `out[i] = Σ_{(dr,dc) ∈ offsets} values[i + (dr,dc)]` on the torus.
///
/// Summation order is the offset order for every cell, independent of `mode`.
pub fn periodic_sum(values: &Grid<f64>, offsets: &[(i32, i32)], mode: ExecMode) -> Grid<f64> {
    let (rows, cols) = (values.rows(), values.cols());
    let mut out = Grid::filled(rows, cols, 0.0);
    let wrap_r: Vec<Vec<usize>> = (0..rows)
        .map(|r| {
            offsets
                .iter()
                .map(|&(dr, _)| (r as i64 + dr as i64).rem_euclid(rows as i64) as usize)
                .collect()
        })
        .collect();
    let wrap_c: Vec<Vec<usize>> = (0..cols)
        .map(|c| {
            offsets
                .iter()
                .map(|&(_, dc)| (c as i64 + dc as i64).rem_euclid(cols as i64) as usize)
                .collect()
        })
        .collect();
    let src = values.as_slice();
    exec::for_each_row(mode, out.as_mut_slice(), cols, |r, row| {
        let rr = &wrap_r[r];
        for (c, slot) in row.iter_mut().enumerate() {
            let cc = &wrap_c[c];
            let mut acc = 0.0;
            for k in 0..rr.len() {
                acc += src[rr[k] * cols + cc[k]];
            }
            *slot = acc;
        }
    });
    out
}
