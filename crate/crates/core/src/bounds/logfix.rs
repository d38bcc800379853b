//! Directed-rounding fixed-point logarithms.
//!
//! Verdicts in this crate are decided by exact integer comparisons; the
//! logarithmic quantities (the Waring `h(q)` and existence thresholds) are
//! irrational, so they are *reported* as rigorous intervals instead. An
//! interval `[lo, hi]` scaled by `2^frac_bits` brackets the true value; a
//! comparison that the interval cannot settle is answered `None`, and
//! callers escalate precision rather than guess.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// A rigorous bracket `lo/2^frac_bits ≤ value ≤ hi/2^frac_bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueInterval {
    pub frac_bits: u32,
    pub lo: BigInt,
    pub hi: BigInt,
}

impl ValueInterval {
    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NEG_INFINITY) / 2f64.powi(self.frac_bits as i32)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::INFINITY) / 2f64.powi(self.frac_bits as i32)
    }

    /// `Some(true)` when the whole interval lies strictly below `other`,
    /// `Some(false)` when it lies at or above, `None` when they overlap.
    pub fn strictly_below(&self, other: &ValueInterval) -> Option<bool> {
        let left = &self.hi << other.frac_bits;
        let right = &other.lo << self.frac_bits;
        if left < right {
            return Some(true);
        }
        let left = &self.lo << other.frac_bits;
        let right = &other.hi << self.frac_bits;
        if left >= right {
            return Some(false);
        }
        None
    }

    /// `Some(true)`/`Some(false)` when the interval settles `value > z`,
    /// `None` when `z` falls inside.
    pub fn exceeds_integer(&self, z: i64) -> Option<bool> {
        let scaled = BigInt::from(z) << self.frac_bits;
        if self.lo > scaled {
            return Some(true);
        }
        if self.hi <= scaled {
            return Some(false);
        }
        None
    }

    /// The ceiling of the value, when both endpoints agree on it.
    pub fn ceiling(&self) -> Option<BigInt> {
        let unit = BigInt::one() << self.frac_bits;
        let lo = self.lo.div_ceil(&unit);
        let hi = self.hi.div_ceil(&unit);
        (lo == hi).then_some(lo)
    }
}

/// Rigorous `[lo, hi]` bracket of `log₂ x` at `frac_bits` fractional bits,
/// for `x ≥ 1`. Exact (degenerate interval) for powers of two; otherwise bit
/// extraction by repeated squaring, run twice — once flooring intermediate
/// mantissas (lower bound) and once rounding them up (upper bound) — with 64
/// guard bits, so the bracket width stays within a few final-place units.
pub fn log2_interval(x: &BigUint, frac_bits: u32) -> ValueInterval {
    assert!(!x.is_zero(), "log₂ 0 is undefined");
    let int_part = x.bits() - 1;
    if x.count_ones() == 1 {
        let v = BigInt::from(int_part) << frac_bits;
        return ValueInterval { frac_bits, lo: v.clone(), hi: v };
    }
    let w = frac_bits + 64;
    // Mantissa x/2^int in [1, 2) as an exact w-bit fixed-point value.
    let m0: BigUint = (x << w) >> int_part as u32;
    let threshold: BigUint = BigUint::one() << (2 * w as u64 + 1);

    let run = |round_up: bool| -> BigUint {
        let mut m = m0.clone();
        let mut frac = BigUint::zero();
        for _ in 0..frac_bits {
            let s = &m * &m;
            let shift = if s >= threshold {
                frac = (frac << 1) + 1u32;
                w + 1
            } else {
                frac <<= 1;
                w
            };
            m = if round_up {
                let mask = (BigUint::one() << shift) - 1u32;
                (s + mask) >> shift
            } else {
                s >> shift
            };
        }
        frac
    };

    let base = BigInt::from(int_part) << frac_bits;
    let lo = &base + BigInt::from(run(false));
    let hi = base + BigInt::from(run(true)) + 1;
    ValueInterval { frac_bits, lo, hi }
}

/// Directed-rounding interval quotient `num/den`, requiring `den.lo > 0`.
pub fn div_intervals(
    num: &ValueInterval,
    den: &ValueInterval,
    frac_bits: u32,
) -> Option<ValueInterval> {
    if den.lo <= BigInt::zero() {
        return None;
    }
    debug_assert_eq!(num.frac_bits, den.frac_bits);
    // Scales cancel in the quotient; reapply the output scale directly.
    let lo = (&num.lo << frac_bits).div_floor(&den.hi);
    let hi = (&num.hi << frac_bits).div_ceil(&den.lo);
    Some(ValueInterval { frac_bits, lo, hi })
}
