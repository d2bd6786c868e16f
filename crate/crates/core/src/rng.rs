//! Documented 64-bit linear congruential generator.
//!
//! State update (wrapping arithmetic modulo 2^64):
//!
//! ```text
//! state <- state * 6364136223846793005 + 1442695040888963407
//! ```
//!
//! The initial state is the seed itself. `next_u64` returns the state after
//! the update. Uniform reals use the top 53 bits: `(state >> 11) * 2^-53`,
//! which lies in `[0, 1)`. Integers in `[0, n)` are the high word of the
//! 128-bit product `next_u64() * n`, i.e. `(next_u64() as u128 * n) >> 64`
//! (the low bits of an LCG with power-of-two modulus have short periods).
//! Any implementation following these three rules reproduces every draw.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lcg64 {
    state: u64,
}

const MUL: u64 = 6364136223846793005;
const INC: u64 = 1442695040888963407;

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(MUL).wrapping_add(INC);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[a, b)`.
    pub fn uniform_in(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.uniform()
    }

    /// Integer in `[0, n)`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Integer in `[lo, hi)`.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(hi > lo);
        lo + self.below((hi - lo) as u64) as i64
    }

    /// Standard normal by Box-Muller (one draw per pair of uniforms).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_draws_from_zero() {
        let mut r = Lcg64::new(0);
        assert_eq!(r.next_u64(), INC);
        assert_eq!(r.next_u64(), INC.wrapping_mul(MUL).wrapping_add(INC));
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = Lcg64::new(42);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn below_is_uniform_under_strided_use() {
        // four draws per record, as random_field does
        let mut r = Lcg64::new(1);
        let mut counts = [0usize; 16];
        for _ in 0..16_000 {
            counts[r.below(16) as usize] += 1;
            for _ in 0..3 {
                r.next_u64();
            }
        }
        assert!(counts.iter().all(|&c| (800..1200).contains(&c)), "{counts:?}");
    }
}
