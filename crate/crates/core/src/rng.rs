//! Counter-based, splittable random streams.
//!
//! The generator is SplitMix64 viewed as a counter-based function: draw `i`
//! of a stream with key `k` is `mix64(k + i·γ)` with γ = 0x9e3779b97f4a7c15
//! and the Stafford "Mix13" finalizer. A stream is fully identified by its
//! 64-bit key, and child streams are derived by hashing a label into the
//! parent key, so the value of any draw depends only on the path of labels
//! from the master seed. The bounded-integer and float conversions below are
//! part of the pinned algorithm; they do not delegate to any external crate
//! whose sampling algorithms might change between versions.

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Stream labels used by the model. Changing any of these changes outputs.
pub mod label {
    pub const FIELDS: u64 = 0x4649_454c_4453; // "FIELDS"
    pub const HEDGEROWS: u64 = 0x0048_4544_4745; // "HEDGE"
    pub const GRASSLAND: u64 = 0x0047_5241_5353; // "GRASS"
    pub const REPLICATE: u64 = 0x5245_504c; // "REPL"
    pub const UNIFORM_TEST: u64 = 0x554e_4946; // "UNIF"
    pub const TARGET_NOISE: u64 = 0x004e_4f49_5345; // "NOISE"
}

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child key from a parent key and a label.
#[inline]
pub fn derive(parent: u64, label: u64) -> u64 {
    mix64(parent ^ mix64(label.wrapping_add(GAMMA)))
}

/// Fold a path of labels into a key, starting from `master`.
pub fn derive_path(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(master), |key, &l| derive(key, l))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamRng {
    key: u64,
    counter: u64,
}

impl StreamRng {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    /// Stream for `seed` routed through `label`.
    pub fn from_seed(seed: u64, label: u64) -> Self {
        Self::new(derive(mix64(seed), label))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Independent child stream; does not advance `self`.
    pub fn substream(&self, label: u64) -> Self {
        Self::new(derive(self.key, label))
    }

    /// Random access: the `index`-th draw of this stream (1-based, like `next_u64`).
    pub fn at(&self, index: u64) -> u64 {
        mix64(self.key.wrapping_add(index.wrapping_mul(GAMMA)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        self.at(self.counter)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n) by Lemire's multiply-and-reject method.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Fisher–Yates shuffle, last index first.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_reference_splitmix64() {
        // SplitMix64 seeded with 0: first outputs of the reference implementation.
        let mut rng = StreamRng::new(0);
        assert_eq!(rng.next_u64(), 0xe220_a839_7b1d_cdaf);
        assert_eq!(rng.next_u64(), 0x6e78_9e6a_a1b9_65f4);
        assert_eq!(rng.next_u64(), 0x06c4_5d18_8009_454f);
    }

    #[test]
    fn random_access_agrees_with_sequential() {
        let mut rng = StreamRng::from_seed(7, label::FIELDS);
        let fresh = rng.clone();
        for i in 1..=100 {
            assert_eq!(rng.next_u64(), fresh.at(i));
        }
    }

    #[test]
    fn substreams_are_distinct_and_stable() {
        let root = StreamRng::new(derive_path(42, &[label::REPLICATE, 3]));
        let a = root.substream(label::FIELDS);
        let b = root.substream(label::HEDGEROWS);
        assert_ne!(a.key(), b.key());
        assert_eq!(a, root.substream(label::FIELDS));
        assert_ne!(derive_path(42, &[1, 2]), derive_path(42, &[2, 1]));
    }

    #[test]
    fn below_stays_in_range_and_covers_it() {
        let mut rng = StreamRng::new(1);
        let mut seen = [0usize; 7];
        for _ in 0..7000 {
            seen[rng.below(7) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800 && c < 1200), "{seen:?}");
    }

    #[test]
    fn floats_in_unit_interval() {
        let mut rng = StreamRng::new(99);
        for _ in 0..10_000 {
            let x = rng.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = StreamRng::new(5);
        let mut v: Vec<u32> = (0..50).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
