//! 64-bit linear congruential generator used for every seeded search, so
//! runs are reproducible across platforms and implementations.
//!
//! State update: `x ← 6364136223846793005·x + 1442695040888963407 (mod 2^64)`.
//! Choices use the high 32 bits of the new state.

const MULTIPLIER: u64 = 6364136223846793005;
const INCREMENT: u64 = 1442695040888963407;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lcg {
    state: u64,
}

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(MULTIPLIER)
            .wrapping_add(INCREMENT);
        self.state
    }

    pub fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    /// Uniform-ish integer in `0..n` from the high bits. `n` must be positive
    /// and below 2^32.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0 && n <= u32::MAX as u64 + 1, "range out of bounds");
        (self.next_u32() as u64 * n) >> 32
    }

    /// Integer in `lo..=hi`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi);
        lo + self.below(hi - lo + 1)
    }

    pub fn coin(&mut self) -> bool {
        self.below(2) == 1
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Random composition of `total` into `parts` non-negative integers.
    pub fn composition(&mut self, total: u64, parts: usize) -> Vec<u64> {
        if parts == 0 {
            return Vec::new();
        }
        let mut cuts: Vec<u64> = (0..parts - 1).map(|_| self.range(0, total)).collect();
        cuts.sort_unstable();
        let mut out = Vec::with_capacity(parts);
        let mut prev = 0;
        for c in cuts {
            out.push(c - prev);
            prev = c;
        }
        out.push(total - prev);
        out
    }
}
