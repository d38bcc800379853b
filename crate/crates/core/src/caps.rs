//! Work-limit configuration shared by every enumeration path.
//!
//! All caps are plain data: callers construct a [`Caps`] (usually via
//! [`Caps::from_env`]) and pass it to the operations that enumerate. No cap
//! is a hard-coded constant inside an algorithm, so a larger machine can
//! raise them without recompiling.

use num_bigint::BigUint;
use thiserror::Error;

/// Environment variable overriding the brute-force enumeration cap (decimal).
pub const MAX_ENUM_ENV: &str = "DIAGCOUNT_MAX_ENUM";

/// Raised when an operation would exceed a configured work limit before any
/// heavy work is performed. Carries the cap name so callers can report which
/// knob to raise.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("cap '{cap}' exceeded: estimated cost {estimated} > limit {limit}")]
pub struct CapExceeded {
    pub cap: &'static str,
    pub limit: u64,
    pub estimated: BigUint,
}

/// Enumeration and memory limits for the counting engines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caps {
    /// Largest field order `p^m` that may be constructed (elements are
    /// enumerable by design).
    pub field_order: u64,
    /// Maximum number of point evaluations a brute-force count may perform.
    pub bruteforce_evals: u64,
    /// Maximum dense distribution size `q^n` for the convolution engine.
    pub distribution_size: u64,
    /// Maximum number of column subsets examined by the hypothesis (H)
    /// check, and of zero-pattern subsets in inclusion–exclusion.
    pub subsets: u64,
    /// Maximum rejection-sampling attempts when generating coefficient
    /// matrices for fields too small for the direct construction.
    pub generator_retries: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            field_order: 1 << 20,
            bruteforce_evals: 100_000_000,
            distribution_size: 1 << 24,
            subsets: 1_000_000,
            generator_retries: 10_000,
        }
    }
}

impl Caps {
    /// Default caps with `DIAGCOUNT_MAX_ENUM` (if set and parseable as a
    /// decimal integer) overriding the brute-force evaluation budget.
    pub fn from_env() -> Self {
        let mut caps = Caps::default();
        if let Ok(raw) = std::env::var(MAX_ENUM_ENV) {
            if let Ok(v) = raw.trim().parse::<u64>() {
                caps.bruteforce_evals = v;
            }
        }
        caps
    }

    /// Checks `estimated ≤ limit`, returning a named [`CapExceeded`] otherwise.
    pub fn check(cap: &'static str, limit: u64, estimated: &BigUint) -> Result<(), CapExceeded> {
        if estimated > &BigUint::from(limit) {
            Err(CapExceeded { cap, limit, estimated: estimated.clone() })
        } else {
            Ok(())
        }
    }
}
