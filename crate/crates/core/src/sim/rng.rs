/// xorshift64* (Vigna 2014): shifts 12/25/27, multiplier 0x2545F4914F6CDD1D.
///
/// The seed is mixed with 0x9E3779B97F4A7C15 so that seed 0 is usable; a
/// zero state is replaced by that constant. `below(n)` is `next_u64() % n`
/// and `chance(p)` compares the top 53 bits, as a fraction, against `p`.
/// Ports that follow these four rules reproduce every simulation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

impl Rng {
    pub fn new(seed: u64) -> Self {
        let state = seed ^ GOLDEN;
        Rng { state: if state == 0 { GOLDEN } else { state } }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform-ish integer in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        (self.next_u64() % n as u64) as usize
    }

    /// Integer in `lo..=hi`.
    pub fn range(&mut self, (lo, hi): (usize, usize)) -> usize {
        if hi <= lo {
            return lo;
        }
        lo + self.below(hi - lo + 1)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        ((self.next_u64() >> 11) as f64 / (1u64 << 53) as f64) < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> Option<&'a T> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.below(items.len())])
        }
    }

    /// Index drawn in proportion to `weights`; `None` if all are zero.
    pub fn weighted(&mut self, weights: &[u32]) -> Option<usize> {
        let total: u64 = weights.iter().map(|w| u64::from(*w)).sum();
        if total == 0 {
            return None;
        }
        let mut ticket = self.next_u64() % total;
        for (i, w) in weights.iter().enumerate() {
            let w = u64::from(*w);
            if ticket < w {
                return Some(i);
            }
            ticket -= w;
        }
        unreachable!("ticket below total")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_sequence() {
        // Independent recomputation of the first outputs for seed 1.
        let mut x: u64 = 1 ^ GOLDEN;
        let mut expected = Vec::new();
        for _ in 0..3 {
            x ^= x >> 12;
            x ^= x << 25;
            x ^= x >> 27;
            expected.push(x.wrapping_mul(2685821657736338717));
        }
        let mut rng = Rng::new(1);
        let got: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn seed_zero_and_golden_are_valid() {
        assert_ne!(Rng::new(0).next_u64(), 0);
        let mut rng = Rng::new(GOLDEN);
        assert_ne!(rng.next_u64(), 0);
    }

    #[test]
    fn helpers_stay_in_bounds() {
        let mut rng = Rng::new(7);
        for _ in 0..1000 {
            assert!(rng.below(5) < 5);
            let r = rng.range((2, 4));
            assert!((2..=4).contains(&r));
        }
        assert_eq!(rng.range((3, 3)), 3);
        assert_eq!(rng.weighted(&[0, 0]), None);
        for _ in 0..100 {
            assert_eq!(rng.weighted(&[0, 5, 0]), Some(1));
        }
        assert!(!rng.chance(0.0));
        assert!(rng.chance(1.0));
    }
}
