//! Halton low-discrepancy sequence. Deterministic for a given seed: the
//! seed offsets the start index, so different seeds give disjoint,
//! reproducible point streams.

const BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Radical-inverse of `index` in the given base, in `[0, 1)`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut frac = 1.0 / base as f64;
    while index > 0 {
        result += (index % base) as f64 * frac;
        index /= base;
        frac /= base as f64;
    }
    result
}

/// Stream of Halton points in the unit cube of the given dimension.
pub struct Halton {
    dim: usize,
    index: u64,
}

impl Halton {
    /// `seed` shifts the starting index; index 0 (the origin) is skipped.
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(
            dim <= BASES.len(),
            "halton sampler supports up to {} dimensions",
            BASES.len()
        );
        Self {
            dim,
            index: seed.wrapping_mul(0x9e37) + 1,
        }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        (0..self.dim)
            .map(|d| radical_inverse(i, BASES[d]))
            .collect()
    }
}
