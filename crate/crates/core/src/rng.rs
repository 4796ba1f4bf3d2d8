//! SplitMix64, the only randomness source used by the set generators.
//!
//! State update and output mix, all arithmetic modulo 2^64:
//!
//! ```text
//! state ← state + 0x9E3779B97F4A7C15
//! z ← state
//! z ← (z ⊕ (z >> 30)) · 0xBF58476D1CE4E5B9
//! z ← (z ⊕ (z >> 27)) · 0x94D049BB133111EB
//! output z ⊕ (z >> 31)
//! ```
//!
//! Integers in `[1, b]` are drawn as `1 + (next_u64() mod b)`.
//! Seed 0 yields `0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F`.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish integer in `[1, bound]` (modulo reduction).
    pub fn one_to(&mut self, bound: u64) -> u64 {
        assert!(bound >= 1);
        1 + self.next_u64() % bound
    }

    /// Integer in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound >= 1);
        self.next_u64() % bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_vectors() {
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(r.next_u64(), 0x06C4_5D18_8009_454F);
        let mut r = SplitMix64::new(7);
        assert_eq!(r.next_u64(), 0x63CB_E1E4_5932_0DD7);
        assert_eq!(r.next_u64(), 0x044C_3CD7_F43C_661C);
    }

    #[test]
    fn bounded_draws_stay_in_range() {
        let mut r = SplitMix64::new(42);
        for _ in 0..1000 {
            let v = r.one_to(5);
            assert!((1..=5).contains(&v));
            assert!(r.below(3) < 3);
        }
    }
}
