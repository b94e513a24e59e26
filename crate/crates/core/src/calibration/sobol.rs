//! Unscrambled Sobol sequence in up to eight dimensions.
//!
//! Direction numbers are the Joe–Kuo `new-joe-kuo-6.21201` set; points are
//! generated in Gray-code order starting from the origin, which matches the
//! common reference implementations.

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;
const BITS: usize = 32;

/// `(degree, coefficients, initial m values)` for dimensions 2..=8.
const PRIMITIVES: [(u32, u32, &[u32]); MAX_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
];

fn directions(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, init) = PRIMITIVES[dim - 1];
    let s = s as usize;
    let mut m = [0u32; BITS];
    m[..s].copy_from_slice(init);
    for k in s..BITS {
        let mut next = m[k - s] ^ (m[k - s] << s);
        for i in 1..s {
            if (a >> (s - 1 - i)) & 1 == 1 {
                next ^= m[k - i] << i;
            }
        }
        m[k] = next;
    }
    for k in 0..BITS {
        v[k] = m[k] << (BITS - 1 - k);
    }
    v
}

/// Streaming Sobol generator.
#[derive(Debug, Clone)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::domain(format!(
                "Sobol dimension must lie in 1..={MAX_DIM}, got {dim}"
            )));
        }
        Ok(Self {
            directions: (0..dim).map(directions).collect(),
            state: vec![0; dim],
            index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    /// The next point; the first is the origin.
    pub fn next_point(&mut self) -> Vec<f64> {
        let out = self.state.iter().map(|&x| f64::from(x) / 2f64.powi(BITS as i32)).collect();
        let bit = self.index.trailing_ones() as usize;
        assert!(bit < BITS, "Sobol sequence exhausted");
        for (x, v) in self.state.iter_mut().zip(&self.directions) {
            *x ^= v[bit];
        }
        self.index += 1;
        out
    }
}

/// The first `n` points in `[0,1)^dim`.
pub fn sobol_sample(dim: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::domain("Sobol sample size must be at least 1"));
    }
    let mut gen = Sobol::new(dim)?;
    Ok((0..n).map(|_| gen.next_point()).collect())
}

/// Map unit-cube points affinely into `ranges`.
pub fn scale_points(points: &[Vec<f64>], ranges: &[[f64; 2]]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| p.iter().zip(ranges).map(|(u, [lo, hi])| lo + u * (hi - lo)).collect())
        .collect()
}
