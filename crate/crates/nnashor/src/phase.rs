//! Exact dyadic rotation angles.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Hard cap on the denominator exponent. Rotations in an `n`-bit construction
/// need exponents up to about `n + 2 log2 n`, so the cap is generous enough
/// for the largest sweeps we build (n = 256) while still catching runaway
/// normalization bugs.
pub const MAX_EXP: u32 = 4096;

/// An angle of `2π · num / 2^exp`, kept normalized so that `0 <= num < 2^exp`
/// and `num` is odd (or the phase is exactly zero with `exp == 0`).
///
/// Addition is exact modulo a full turn, and every phase has an exact
/// negation, so adjoints of rotation gates stay in the representation.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicPhase {
    num: BigUint,
    exp: u32,
}

impl DyadicPhase {
    /// Phase zero.
    pub fn zero() -> Self {
        DyadicPhase {
            num: BigUint::zero(),
            exp: 0,
        }
    }

    /// Half a turn (angle π), the phase of a Z / CZ gate.
    pub fn half() -> Self {
        DyadicPhase {
            num: BigUint::one(),
            exp: 1,
        }
    }

    /// `2π / 2^exp`.
    pub fn unit(exp: u32) -> Self {
        Self::new(BigUint::one(), exp)
    }

    /// `2π · num / 2^exp`, normalized.
    pub fn new(num: BigUint, exp: u32) -> Self {
        assert!(exp <= MAX_EXP, "phase exponent {exp} exceeds cap {MAX_EXP}");
        let mut p = DyadicPhase { num, exp };
        p.normalize();
        p
    }

    /// Convenience constructor from machine integers.
    pub fn from_u128(num: u128, exp: u32) -> Self {
        Self::new(BigUint::from(num), exp)
    }

    fn normalize(&mut self) {
        // Reduce modulo one turn.
        if self.num.bits() as u32 > self.exp {
            self.num &= (BigUint::one() << self.exp) - BigUint::one();
        }
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0) as u32;
        let shift = tz.min(self.exp);
        self.num >>= shift;
        self.exp -= shift;
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    /// Exact sum modulo one turn.
    pub fn add(&self, other: &DyadicPhase) -> DyadicPhase {
        let exp = self.exp.max(other.exp);
        let a = &self.num << (exp - self.exp);
        let b = &other.num << (exp - other.exp);
        DyadicPhase::new(a + b, exp)
    }

    /// Exact negation modulo one turn.
    pub fn neg(&self) -> DyadicPhase {
        if self.is_zero() {
            return DyadicPhase::zero();
        }
        let full = BigUint::one() << self.exp;
        DyadicPhase::new(full - &self.num, self.exp)
    }

    /// Angle in turns as a float, for the simulator only.
    pub fn turns(&self) -> f64 {
        // num < 2^exp, so the ratio is in [0, 1); compute via the top bits to
        // stay accurate when exp is large.
        if self.num.is_zero() {
            return 0.0;
        }
        let bits = self.num.bits() as u32;
        if bits <= 64 {
            let n: u64 = self.num.iter_u64_digits().next().unwrap_or(0);
            n as f64 / 2f64.powi(self.exp as i32)
        } else {
            let shift = bits - 64;
            let top: u64 = (&self.num >> shift).iter_u64_digits().next().unwrap();
            top as f64 / 2f64.powi((self.exp - shift) as i32)
        }
    }
}

impl fmt::Debug for DyadicPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Display for DyadicPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_removes_twos() {
        let p = DyadicPhase::from_u128(4, 4); // 4/16 = 1/4
        assert_eq!(p.exp(), 2);
        assert_eq!(p.num(), &BigUint::from(1u32));
    }

    #[test]
    fn add_neg_cancels() {
        for exp in 0..20u32 {
            for num in [0u128, 1, 3, 5, 7, 11, (1 << 19) - 1] {
                let p = DyadicPhase::from_u128(num, exp);
                assert!(p.add(&p.neg()).is_zero(), "{p:?}");
            }
        }
    }

    #[test]
    fn wraps_modulo_turn() {
        let p = DyadicPhase::from_u128(9, 3); // 9/8 -> 1/8
        assert_eq!(p, DyadicPhase::from_u128(1, 3));
    }

    #[test]
    fn turns_matches_small() {
        let p = DyadicPhase::from_u128(3, 3);
        assert!((p.turns() - 0.375).abs() < 1e-15);
    }
}
