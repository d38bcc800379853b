//! Closed-form estimates, error bounds, and existence thresholds for
//! diagonal systems, with every verdict decided by exact integer
//! arithmetic.
//!
//! Bounds with half-integer exponents `q^{s/2}` are compared in squared
//! form: the report carries `error_bound_sq = B²` and the verdict of
//! `(N − main)² ≤ B²`. Logarithmic quantities (the Waring `h(q)`, the
//! same-exponent `t`-threshold) are irrational; their *verdicts* are reduced
//! to equivalent exact power comparisons, while the values themselves are
//! reported as directed-rounding intervals (see [`logfix`]) that escalate
//! precision and answer `Indeterminate` rather than guess a near-tie.

pub mod logfix;

pub use logfix::{log2_interval, ValueInterval};

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::caps::{CapExceeded, Caps};
use crate::count::{
    count_box, count_bruteforce, count_convolution, count_nonzero, CountError, Engine,
    NonzeroReport, Restriction,
};
use crate::model::{
    validate_system, BoundId, DiagonalSystem, ModelError, RhsFamily, ValidationReport,
};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("bound {bound:?} is not applicable: {reason}")]
    RegimeNotApplicable { bound: BoundId, reason: String },
    #[error("shape violation: {0}")]
    ShapeViolation(String),
    #[error("q = {q} does not exceed the required threshold (6n·d_1)² = {threshold}")]
    ThresholdNotMet { q: u64, threshold: BigUint },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error(transparent)]
    Cap(#[from] CapExceeded),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Violated,
    Indeterminate,
    NotApplicable,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Indeterminate => "indeterminate",
            Verdict::NotApplicable => "not_applicable",
        }
    }
}

/// Inputs echoed into every report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundInputs {
    pub q: u64,
    pub t: usize,
    pub n: usize,
    pub k: usize,
    pub d1: u64,
    pub margin: Option<u64>,
}

impl BoundInputs {
    fn from_system(sys: &DiagonalSystem) -> BoundInputs {
        BoundInputs {
            q: sys.field.order(),
            t: sys.num_vars(),
            n: sys.num_eqs(),
            k: sys.coupled_vars(),
            d1: sys.d1(),
            margin: None,
        }
    }
}

/// One evaluated bound: main term, error bound (squared or direct), and the
/// exact-integer verdict for the supplied count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub bound: BoundId,
    pub main_term: BigInt,
    /// `B²` for bounds of the form `|N − main| ≤ B` with irrational `B`.
    pub error_bound_sq: Option<BigUint>,
    /// `B` for bounds that are integers outright.
    pub error_bound: Option<BigUint>,
    pub count: BigUint,
    pub verdict: Verdict,
    pub inputs: BoundInputs,
}

fn verdict_sq(count: &BigUint, main: &BigInt, err_sq: &BigUint) -> Verdict {
    let diff = BigInt::from(count.clone()) - main;
    if &diff * &diff <= BigInt::from(err_sq.clone()) {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

fn verdict_abs(count: &BigUint, main: &BigInt, err: &BigUint) -> Verdict {
    let diff = (BigInt::from(count.clone()) - main).abs();
    if diff <= BigInt::from(err.clone()) {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

/// An existence threshold evaluated as an exact integer inequality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistenceVerdict {
    pub bound: BoundId,
    pub threshold_holds: bool,
    /// The instantiated inequality that was decided, e.g. `149^98 > 12^202`.
    pub witness_inequality: String,
    /// The large-`t` simplification `q > c²` for this regime's constant `c`.
    pub simplified_q_threshold: BigUint,
    pub q_exceeds_simplified: bool,
}

fn c_factor(scale: u64, n: usize, d1: u64) -> BigUint {
    BigUint::from(scale) * BigUint::from(n) * BigUint::from(d1)
}

fn require_applicable(
    validation: &ValidationReport,
    bound: BoundId,
) -> Result<(), BoundsError> {
    if validation.applicable_bounds.contains(&bound) {
        return Ok(());
    }
    let failed: Vec<&str> = validation
        .regime_conditions
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name.as_str())
        .collect();
    let reason = if failed.is_empty() {
        "the system's families do not match this bound".to_string()
    } else {
        format!("failed conditions: {}", failed.join(", "))
    };
    Err(BoundsError::RegimeNotApplicable { bound, reason })
}

// ---------------------------------------------------------------------------
// Main estimates
// ---------------------------------------------------------------------------

/// `|N − q^{t−n}| ≤ q^{(t−n+1)/2}(6n·d_1)^{t+1}` for constant right-hand
/// sides (`n ≤ t−2`), and `q^{(t−n+k)/2}(6n·d_1)^{t+1}` for coupled ones
/// (`n ≤ (t−1)/2`, `1 ≤ k ≤ n`). Applies verbatim to the univariate and
/// Dickson left-hand variants.
pub fn main_estimate(
    sys: &DiagonalSystem,
    count: &BigUint,
    caps: &Caps,
) -> Result<BoundReport, BoundsError> {
    let validation = validate_system(sys, caps)?;
    let bound = match &sys.rhs {
        RhsFamily::Constants(_) => BoundId::MainConstants,
        _ => BoundId::MainPolynomials,
    };
    require_applicable(&validation, bound)?;

    let inputs = BoundInputs::from_system(sys);
    let q = BigUint::from(inputs.q);
    let (t, n) = (inputs.t, inputs.n);
    let k_eff = inputs.k.max(1);
    let main = BigInt::from(q.pow((t - n) as u32));
    let err_sq =
        q.pow((t - n + k_eff) as u32) * c_factor(6, n, inputs.d1).pow(2 * (t as u32 + 1));
    let verdict = verdict_sq(count, &main, &err_sq);
    Ok(BoundReport {
        bound,
        main_term: main,
        error_bound_sq: Some(err_sq),
        error_bound: None,
        count: count.clone(),
        verdict,
        inputs,
    })
}

/// Same-exponent homogeneous case (pure powers, zero constants, common
/// exponent `d`): `|N − q^{t−n}| ≤ (q−1)·2^t·(d+1)^{t−1}·q^{(t−n−1)/2}`.
pub fn same_exponent_estimate(
    sys: &DiagonalSystem,
    count: &BigUint,
    caps: &Caps,
) -> Result<BoundReport, BoundsError> {
    let validation = validate_system(sys, caps)?;
    require_applicable(&validation, BoundId::SameExponentZero)?;

    let inputs = BoundInputs::from_system(sys);
    let q = BigUint::from(inputs.q);
    let (t, n, d) = (inputs.t, inputs.n, inputs.d1);
    let main = BigInt::from(q.pow((t - n) as u32));
    let err_sq = (&q - 1u32).pow(2)
        * BigUint::from(2u32).pow(2 * t as u32)
        * BigUint::from(d + 1).pow(2 * (t as u32 - 1))
        * q.pow((t - n - 1) as u32);
    let verdict = verdict_sq(count, &main, &err_sq);
    Ok(BoundReport {
        bound: BoundId::SameExponentZero,
        main_term: main,
        error_bound_sq: Some(err_sq),
        error_bound: None,
        count: count.clone(),
        verdict,
        inputs,
    })
}

// ---------------------------------------------------------------------------
// Existence thresholds
// ---------------------------------------------------------------------------

fn existence_power_verdict(
    bound: BoundId,
    q: u64,
    t: usize,
    n: usize,
    c: BigUint,
) -> Result<ExistenceVerdict, BoundsError> {
    if t <= 2 * n {
        return Err(BoundsError::ShapeViolation(format!(
            "existence thresholds need t > 2n, got t = {t}, n = {n}"
        )));
    }
    let lhs_exp = (t - 2 * n) as u32;
    let rhs_exp = 2 * t as u32 + 2;
    let holds = BigUint::from(q).pow(lhs_exp) > c.pow(rhs_exp);
    let simplified = c.pow(2);
    Ok(ExistenceVerdict {
        bound,
        threshold_holds: holds,
        witness_inequality: format!("{q}^{lhs_exp} > {c}^{rhs_exp}"),
        q_exceeds_simplified: BigUint::from(q) > simplified,
        simplified_q_threshold: simplified,
    })
}

/// Existence of a solution when `q^{t−2n} > (6n·d_1)^{2t+2}` (the exact form
/// of `q > (6n·d_1)^{(2t+2)/(t−2n)}`). Requires `t > 2n`.
pub fn existence_general(
    q: u64,
    t: usize,
    n: usize,
    d1: u64,
) -> Result<ExistenceVerdict, BoundsError> {
    existence_power_verdict(BoundId::ExistenceGeneral, q, t, n, c_factor(6, n, d1))
}

/// Existence of an all-nonzero solution of a Markoff–Hurwitz system when
/// `q^{t−2n} > (30n·d_1)^{2t+2}`. Requires `t > 2n`.
pub fn mh_existence(q: u64, t: usize, n: usize, d1: u64) -> Result<ExistenceVerdict, BoundsError> {
    existence_power_verdict(BoundId::ExistenceMarkoffHurwitz, q, t, n, c_factor(30, n, d1))
}

// ---------------------------------------------------------------------------
// Markoff–Hurwitz estimate
// ---------------------------------------------------------------------------

/// Main term for the nonzero-coordinate count of a Markoff–Hurwitz system:
/// `Σ_{i=0}^{t−2n−1} (−1)^i C(t,i) q^{t−n−i}`, every term an integer. The
/// equivalent rational form `(q−1)^t/q^n − Σ_{i=t−2n}^{t} (−1)^i C(t,i)
/// q^{t−n−i}` is evaluated alongside and the two are asserted equal.
pub fn mh_main_term(q: u64, t: usize, n: usize) -> Result<BigInt, BoundsError> {
    if n < 1 || 2 * n >= t.saturating_sub(1) {
        return Err(BoundsError::ShapeViolation(format!(
            "the Markoff–Hurwitz main term needs 1 ≤ n < (t−1)/2, got t = {t}, n = {n}"
        )));
    }
    if q <= 2 {
        return Err(BoundsError::ShapeViolation(format!("q must exceed 2, got {q}")));
    }
    let qb = BigInt::from(q);
    let mut sum = BigInt::zero();
    for i in 0..=(t - 2 * n - 1) {
        let term = BigInt::from(binomial(BigUint::from(t), BigUint::from(i)))
            * qb.pow((t - n - i) as u32);
        if i % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    // Cross-check against the rational form.
    let q_rat = BigRational::from_integer(qb.clone());
    let q_pow = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(qb.pow(e as u32))
        } else {
            BigRational::new(BigInt::one(), qb.pow((-e) as u32))
        }
    };
    let mut tail = BigRational::zero();
    for i in (t - 2 * n)..=t {
        let term = BigRational::from_integer(BigInt::from(binomial(
            BigUint::from(t),
            BigUint::from(i),
        ))) * q_pow(t as i64 - n as i64 - i as i64);
        if i % 2 == 0 {
            tail += term;
        } else {
            tail -= term;
        }
    }
    let rational_form = (&q_rat - BigRational::one()).pow(t as i32)
        / BigRational::from_integer(qb.pow(n as u32))
        - tail;
    assert_eq!(
        BigRational::from_integer(sum.clone()),
        rational_form,
        "the two closed forms of the main term must agree"
    );
    Ok(sum)
}

/// `|N* − main| ≤ (15n·d_1)^{t+1}·q^{t/2}` for the nonzero-coordinate count
/// `N*` of a Markoff–Hurwitz system.
pub fn mh_estimate(
    sys: &DiagonalSystem,
    nonzero_count: &BigUint,
    caps: &Caps,
) -> Result<BoundReport, BoundsError> {
    let validation = validate_system(sys, caps)?;
    require_applicable(&validation, BoundId::MarkoffHurwitzEstimate)?;

    let inputs = BoundInputs::from_system(sys);
    let (q, t, n) = (inputs.q, inputs.t, inputs.n);
    let main = mh_main_term(q, t, n)?;
    let err_sq =
        c_factor(15, n, inputs.d1).pow(2 * (t as u32 + 1)) * BigUint::from(q).pow(t as u32);
    let verdict = verdict_sq(nonzero_count, &main, &err_sq);
    Ok(BoundReport {
        bound: BoundId::MarkoffHurwitzEstimate,
        main_term: main,
        error_bound_sq: Some(err_sq),
        error_bound: None,
        count: nonzero_count.clone(),
        verdict,
        inputs,
    })
}

// ---------------------------------------------------------------------------
// Zero-set bounds
// ---------------------------------------------------------------------------

/// Bound on `N_S`, the count of solutions with the coordinates of a fixed
/// size-`i` set pinned to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NiBound {
    /// `|N_S − main_term|² ≤ error_bound_sq`.
    Estimate { main_term: BigUint, error_bound_sq: BigUint },
    /// `N_S ≤ bound`.
    Upper { bound: BigUint },
}

/// Three regimes over `1 ≤ i ≤ t`:
/// `|N_S − q^{t−i−n}| ≤ q^{(t−i)/2}(6n·d_1)^{t−i+1}` while `i ≤ t−2n−1`;
/// `N_S ≤ d_1^n·q^{t−n−i}` for `t−2n ≤ i ≤ t−n`; `N_S ≤ d_1^n` beyond.
/// The estimate regime is the main estimate applied to the reduced
/// `(t−i)`-variable system at its worst coupling (`k = n`), so it is valid
/// for every `k ≤ n`; `k` is taken for interface completeness only.
pub fn ni_bound(i: usize, q: u64, t: usize, n: usize, d1: u64, k: usize) -> NiBound {
    assert!(i >= 1 && i <= t, "i must satisfy 1 ≤ i ≤ t, got i = {i}, t = {t}");
    debug_assert!(k <= n, "coupled variables never exceed the number of equations");
    let qb = BigUint::from(q);
    let d1n = BigUint::from(d1).pow(n as u32);
    if (i as i64) <= t as i64 - 2 * n as i64 - 1 {
        let main = qb.pow((t - i - n) as u32);
        let err_sq = qb.pow((t - i) as u32) * c_factor(6, n, d1).pow(2 * (t - i + 1) as u32);
        NiBound::Estimate { main_term: main, error_bound_sq: err_sq }
    } else if i <= t - n {
        NiBound::Upper { bound: d1n * qb.pow((t - n - i) as u32) }
    } else {
        NiBound::Upper { bound: d1n }
    }
}

// ---------------------------------------------------------------------------
// Same-exponent existence and the Waring bound
// ---------------------------------------------------------------------------

/// Interval bracket of `(a·log₂c + b·log₂q) / (log₂q − 2·log₂c)`, or `None`
/// when the denominator interval is not strictly positive at this precision.
fn log_ratio_interval(
    q: u64,
    c: &BigUint,
    a: u64,
    b: u64,
    frac_bits: u32,
) -> Option<ValueInterval> {
    let lq = log2_interval(&BigUint::from(q), frac_bits);
    let lc = log2_interval(c, frac_bits);
    let num = ValueInterval {
        frac_bits,
        lo: BigInt::from(a) * &lc.lo + BigInt::from(b) * &lq.lo,
        hi: BigInt::from(a) * &lc.hi + BigInt::from(b) * &lq.hi,
    };
    let den = ValueInterval {
        frac_bits,
        lo: &lq.lo - BigInt::from(2) * &lc.hi,
        hi: &lq.hi - BigInt::from(2) * &lc.lo,
    };
    logfix::div_intervals(&num, &den, frac_bits)
}

/// As [`log_ratio_interval`], escalating precision until the denominator
/// separates from zero. Caller must ensure `q > c²` so escalation
/// terminates.
fn log_ratio_auto(q: u64, c: &BigUint, a: u64, b: u64) -> ValueInterval {
    let mut frac_bits = 96;
    loop {
        if let Some(iv) = log_ratio_interval(q, c, a, b, frac_bits) {
            return iv;
        }
        frac_bits *= 2;
        assert!(frac_bits <= 1 << 16, "denominator log₂q − 2log₂c must be positive (q > c²)");
    }
}

/// Same-exponent existence: a nontrivial solution exists when `q > (4d)²`
/// and `t` exceeds `(n+1)·log₂q / (log₂q − 2·log₂(4d))`. The `t`-verdict is
/// decided by the exact equivalent `q^{t−n−1} > (4d)^{2t}`; the threshold
/// itself is reported as an interval and its minimal integer by exact scan.
#[derive(Debug, Clone)]
pub struct SameExponentExistence {
    /// `q > (4d)²`.
    pub q_condition: bool,
    /// Verdict for the supplied `t` (false whenever `q_condition` fails).
    pub threshold_holds: bool,
    pub witness_inequality: String,
    /// Least `t` satisfying the threshold, by exact scan; `None` when
    /// `q_condition` fails (no `t` works).
    pub minimal_t: Option<u64>,
    /// Bracket of the real threshold value (defined when `q_condition`).
    pub threshold: Option<ValueInterval>,
}

pub fn same_exponent_existence(q: u64, d: u64, n: usize, t: usize) -> SameExponentExistence {
    let c = BigUint::from(4 * d);
    let q_condition = BigUint::from(q) > c.pow(2);
    let witness = if t > n + 1 {
        format!("{q}^{} > {}^{}", t - n - 1, c, 2 * t)
    } else {
        format!("t = {t} does not exceed n+1 = {}", n + 1)
    };
    if !q_condition {
        return SameExponentExistence {
            q_condition,
            threshold_holds: false,
            witness_inequality: format!("q = {q} ≤ (4d)² = {}", c.pow(2)),
            minimal_t: None,
            threshold: None,
        };
    }
    let threshold_holds =
        t > n + 1 && BigUint::from(q).pow((t - n - 1) as u32) > c.pow(2 * t as u32);

    // Exact scan for the least valid t: per step the left side gains a
    // factor q and the right side (4d)², and q > (4d)² makes that monotone.
    let mut t_min = n as u64 + 2;
    let mut lhs = BigUint::from(q); // q^{t_min − n − 1}
    let mut rhs = c.pow(2 * (n as u32 + 2)); // (4d)^{2·t_min}
    let step = c.pow(2);
    while lhs <= rhs {
        t_min += 1;
        lhs *= q;
        rhs *= &step;
    }

    SameExponentExistence {
        q_condition,
        threshold_holds,
        witness_inequality: witness,
        minimal_t: Some(t_min),
        threshold: Some(log_ratio_auto(q, &c, 0, n as u64 + 1)),
    }
}

/// Upper bound for the Waring-type threshold: the least `T` with
/// `q^{T−n−1} ≥ (6n·d_1)^{2T+2}`, which is exactly `⌈h(q)⌉` for
/// `h(q) = log(6n·d_1·q^{(n+1)/2}) / log(q^{1/2}/(6n·d_1))`.
#[derive(Debug, Clone)]
pub struct WaringBound {
    pub gamma_upper: u64,
    /// Rigorous bracket of `h(q)`.
    pub h: ValueInterval,
    pub witness_inequality: String,
}

/// Requires `q > (6n·d_1)²`; errors with [`BoundsError::ThresholdNotMet`]
/// otherwise.
pub fn waring_gamma_bound(n: usize, q: u64, d1: u64) -> Result<WaringBound, BoundsError> {
    let c = c_factor(6, n, d1);
    if BigUint::from(q) <= c.pow(2) {
        return Err(BoundsError::ThresholdNotMet { q, threshold: c.pow(2) });
    }
    // Exact scan from T = n+2 (h > n+1 always); monotone since q > c².
    let mut t_cur = n as u64 + 2;
    let mut lhs = BigUint::from(q); // q^{T−n−1}
    let mut rhs = c.pow(2 * (n as u32 + 2) + 2); // c^{2T+2}
    let step = c.pow(2);
    while lhs < rhs {
        t_cur += 1;
        lhs *= q;
        rhs *= &step;
    }
    let h = waring_h(n, q, d1, 96)?;
    debug_assert!(
        h.ceiling().map(|z| z == BigInt::from(t_cur)).unwrap_or(true),
        "interval ceiling must agree with the exact scan when determined"
    );
    Ok(WaringBound {
        gamma_upper: t_cur,
        h,
        witness_inequality: format!("{q}^{} >= {c}^{}", t_cur - n as u64 - 1, 2 * t_cur + 2),
    })
}

/// Bracket of `h(q) = (2·log₂c + (n+1)·log₂q) / (log₂q − 2·log₂c)` with
/// `c = 6n·d_1`, at the requested precision.
pub fn waring_h(n: usize, q: u64, d1: u64, frac_bits: u32) -> Result<ValueInterval, BoundsError> {
    let c = c_factor(6, n, d1);
    if BigUint::from(q) <= c.pow(2) {
        return Err(BoundsError::ThresholdNotMet { q, threshold: c.pow(2) });
    }
    Ok(log_ratio_interval(q, &c, 2, n as u64 + 1, frac_bits)
        .unwrap_or_else(|| log_ratio_auto(q, &c, 2, n as u64 + 1)))
}

// ---------------------------------------------------------------------------
// Congruence (boxed) estimate
// ---------------------------------------------------------------------------

/// Boxed congruence count against
/// `|N_m − (p−m)^{t−n}| ≤ p^{t−n−1}·(6n·d_1)^{t+1}·m·(t−n)` — an integer
/// bound, compared directly. Preconditions (exact): `m ≥ 1`,
/// `m·2^{t−n} < p`, and `p^{t−n−1} > 2^{2t−2n}`.
pub fn congruence_box_estimate(
    p: u64,
    t: usize,
    n: usize,
    d1: u64,
    margin: u64,
    count: &BigUint,
) -> Result<BoundReport, BoundsError> {
    if t <= n {
        return Err(BoundsError::PreconditionFailed(format!("t > n required, got t = {t}, n = {n}")));
    }
    if margin == 0 {
        return Err(BoundsError::PreconditionFailed("margin m ≥ 1 required".into()));
    }
    let s = (t - n) as u32;
    let pb = BigUint::from(p);
    if BigUint::from(margin) * (BigUint::one() << s) >= pb {
        return Err(BoundsError::PreconditionFailed(format!(
            "m·2^(t−n) < p violated: {margin}·2^{s} ≥ {p}"
        )));
    }
    if pb.pow(s - 1) <= (BigUint::one() << (2 * s)) {
        return Err(BoundsError::PreconditionFailed(format!(
            "p^(t−n−1) > 2^(2t−2n) violated: {p}^{} ≤ 2^{}",
            s - 1,
            2 * s
        )));
    }
    let main = BigInt::from((pb.clone() - margin).pow(s));
    let err = pb.pow(s - 1)
        * c_factor(6, n, d1).pow(t as u32 + 1)
        * BigUint::from(margin)
        * BigUint::from(t - n);
    let verdict = verdict_abs(count, &main, &err);
    Ok(BoundReport {
        bound: BoundId::CongruenceBox,
        main_term: main,
        error_bound_sq: None,
        error_bound: Some(err),
        count: count.clone(),
        verdict,
        inputs: BoundInputs { q: p, t, n, k: 0, d1, margin: Some(margin) },
    })
}

// ---------------------------------------------------------------------------
// Full verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Margins at which to evaluate the boxed congruence bound.
    pub box_margins: Vec<u64>,
}

#[derive(Debug)]
pub struct VerifyReport {
    pub validation: ValidationReport,
    pub total: BigUint,
    pub engine: Engine,
    /// Whether a second engine recomputed the total and agreed.
    pub cross_checked: bool,
    pub nonzero: Option<NonzeroReport>,
    pub bounds: Vec<BoundReport>,
    pub existence: Vec<ExistenceVerdict>,
    pub notes: Vec<String>,
    /// True when any applicable bound is violated or an existence threshold
    /// holds without a witness — that falsifies the implementation.
    pub critical: bool,
}

/// Counts the system (both engines when feasible), evaluates every
/// applicable bound and existence verdict, and cross-checks existence
/// implications against the exact counts.
pub fn verify(
    sys: &DiagonalSystem,
    options: &VerifyOptions,
    caps: &Caps,
) -> Result<VerifyReport, BoundsError> {
    let validation = validate_system(sys, caps)?;

    let conv = match count_convolution(sys, Restriction::All, caps) {
        Ok(c) => Some(c),
        Err(CountError::Cap(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let brute = match count_bruteforce(sys, Restriction::All, caps) {
        Ok(c) => Some(c),
        Err(CountError::Cap(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let (total, engine, cross_checked) = match (conv, brute) {
        (Some(c), Some(b)) => {
            if c.count != b.count {
                return Err(CountError::EngineMismatch {
                    context: "total count (convolution vs brute force)".into(),
                    lhs: c.count,
                    rhs: b.count,
                }
                .into());
            }
            (c.count, Engine::Convolution, true)
        }
        (Some(c), None) => (c.count, Engine::Convolution, false),
        (None, Some(b)) => (b.count, Engine::BruteForce, false),
        // Surface the dispatcher's cap error.
        (None, None) => return Err(count_bruteforce(sys, Restriction::All, caps).unwrap_err().into()),
    };

    let needs_nonzero = validation.applicable_bounds.contains(&BoundId::MarkoffHurwitzEstimate);
    let nonzero = if needs_nonzero { Some(count_nonzero(sys, caps)?) } else { None };

    let inputs = BoundInputs::from_system(sys);
    let mut bounds = Vec::new();
    let mut existence = Vec::new();
    let mut notes = Vec::new();
    let mut critical = false;

    for id in &validation.applicable_bounds {
        match id {
            BoundId::MainConstants | BoundId::MainPolynomials => {
                bounds.push(main_estimate(sys, &total, caps)?);
            }
            BoundId::SameExponentZero => {
                bounds.push(same_exponent_estimate(sys, &total, caps)?);
            }
            BoundId::MarkoffHurwitzEstimate => {
                let report = nonzero.as_ref().expect("nonzero counts computed above");
                bounds.push(mh_estimate(sys, &report.nonzero, caps)?);
            }
            BoundId::ExistenceGeneral => {
                let v = existence_general(inputs.q, inputs.t, inputs.n, inputs.d1)?;
                if v.threshold_holds && total.is_zero() {
                    critical = true;
                    notes.push("existence threshold holds but the count is zero".into());
                }
                existence.push(v);
            }
            BoundId::ExistenceSameExponent => {
                let v = same_exponent_existence(inputs.q, inputs.d1, inputs.n, inputs.t);
                if v.threshold_holds && total <= BigUint::one() {
                    critical = true;
                    notes.push(
                        "same-exponent existence threshold holds but only the trivial solution exists"
                            .into(),
                    );
                }
                existence.push(ExistenceVerdict {
                    bound: BoundId::ExistenceSameExponent,
                    threshold_holds: v.threshold_holds,
                    witness_inequality: v.witness_inequality,
                    simplified_q_threshold: BigUint::from(4 * inputs.d1).pow(2),
                    q_exceeds_simplified: v.q_condition,
                });
            }
            BoundId::ExistenceMarkoffHurwitz => {
                let v = mh_existence(inputs.q, inputs.t, inputs.n, inputs.d1)?;
                if v.threshold_holds
                    && nonzero.as_ref().map(|r| r.nonzero.is_zero()).unwrap_or(false)
                {
                    critical = true;
                    notes.push("Markoff–Hurwitz existence holds but no nonzero solution exists".into());
                }
                existence.push(v);
            }
            BoundId::CongruenceBox => {
                for &margin in &options.box_margins {
                    let boxed = count_box(sys, margin, caps)?;
                    match congruence_box_estimate(
                        inputs.q, inputs.t, inputs.n, inputs.d1, margin, &boxed.count,
                    ) {
                        Ok(report) => bounds.push(report),
                        Err(BoundsError::PreconditionFailed(reason)) => {
                            notes.push(format!("box margin {margin}: {reason}"));
                            bounds.push(BoundReport {
                                bound: BoundId::CongruenceBox,
                                main_term: BigInt::zero(),
                                error_bound_sq: None,
                                error_bound: None,
                                count: boxed.count,
                                verdict: Verdict::NotApplicable,
                                inputs: BoundInputs { margin: Some(margin), ..inputs.clone() },
                            });
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }

    if bounds.iter().any(|b| b.verdict == Verdict::Violated) {
        critical = true;
    }

    Ok(VerifyReport {
        validation,
        total,
        engine,
        cross_checked,
        nonzero,
        bounds,
        existence,
        notes,
        critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::count_solutions;
    use crate::gf::build_field;
    use crate::model::LhsFamily;

    fn constants_system(
        p: u64,
        m: usize,
        exponents: &[u64],
        rows: &[&[u64]],
        rhs: &[u64],
    ) -> DiagonalSystem {
        let f = build_field(p, m).unwrap();
        let matrix = rows
            .iter()
            .map(|r| r.iter().map(|&c| f.decode(c).unwrap()).collect())
            .collect();
        let b = rhs.iter().map(|&c| f.decode(c).unwrap()).collect();
        DiagonalSystem::new(f, exponents.to_vec(), matrix, LhsFamily::PurePowers, RhsFamily::Constants(b))
            .unwrap()
    }

    #[test]
    fn main_estimate_error_constant_is_frozen() {
        // t = 5, n = 1, d_1 = 3 over F_7: the error bound squares to
        // q^{t−n+1}·((6·1·3)^{t+1})² with (6·3)^6 = 34012224.
        let sys = constants_system(7, 1, &[3; 5], &[&[1, 2, 3, 4, 5]], &[1]);
        let n = count_solutions(&sys, Restriction::All, &Caps::default()).unwrap().count;
        let report = main_estimate(&sys, &n, &Caps::default()).unwrap();
        assert_eq!(report.bound, BoundId::MainConstants);
        assert_eq!(report.main_term, BigInt::from(7u32.pow(4)));
        assert_eq!(
            report.error_bound_sq.unwrap(),
            BigUint::from(7u32).pow(5) * BigUint::from(34012224u64).pow(2)
        );
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn main_estimate_bijection_has_zero_difference() {
        // gcd(3, 4) = 1 over F_5: the count is exactly q^{t−n}.
        let sys = constants_system(5, 1, &[3, 3, 3], &[&[1, 2, 3]], &[2]);
        let n = count_solutions(&sys, Restriction::All, &Caps::default()).unwrap().count;
        assert_eq!(n, BigUint::from(25u32));
        let report = main_estimate(&sys, &n, &Caps::default()).unwrap();
        assert_eq!(BigInt::from(n), report.main_term);
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn main_estimate_mixed_exponents_over_f7() {
        let sys = constants_system(7, 1, &[4, 3, 2], &[&[1, 1, 1]], &[1]);
        let n = count_bruteforce(&sys, Restriction::All, &Caps::default()).unwrap().count;
        let report = main_estimate(&sys, &n, &Caps::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn main_estimate_rejects_wrong_shapes() {
        // n = 1, t = 2: n ≤ t−2 fails.
        let sys = constants_system(5, 1, &[3, 2], &[&[1, 1]], &[0]);
        let err = main_estimate(&sys, &BigUint::zero(), &Caps::default()).unwrap_err();
        assert!(matches!(err, BoundsError::RegimeNotApplicable { bound: BoundId::MainConstants, .. }));

        // Hypothesis (H) fails on a zero entry.
        let sys = constants_system(5, 1, &[4, 3, 2], &[&[1, 0, 1]], &[0]);
        let err = main_estimate(&sys, &BigUint::zero(), &Caps::default()).unwrap_err();
        assert!(matches!(err, BoundsError::RegimeNotApplicable { .. }));
    }

    #[test]
    fn same_exponent_estimate_frozen_values() {
        // x² + y² + z² = 0 over F_5: N = 25 = main term; error bound
        // squared is (q−1)²·2^{2t}·(d+1)^{2(t−1)}·q^{t−n−1} = 414720.
        let sys = constants_system(5, 1, &[2, 2, 2], &[&[1, 1, 1]], &[0]);
        let n = count_solutions(&sys, Restriction::All, &Caps::default()).unwrap().count;
        assert_eq!(n, BigUint::from(25u32));
        let report = same_exponent_estimate(&sys, &n, &Caps::default()).unwrap();
        assert_eq!(report.main_term, BigInt::from(25));
        assert_eq!(report.error_bound_sq.unwrap(), BigUint::from(414720u64));
        assert_eq!(report.verdict, Verdict::Holds);

        // Nonzero right-hand side leaves the regime.
        let sys = constants_system(5, 1, &[2, 2, 2], &[&[1, 1, 1]], &[1]);
        assert!(matches!(
            same_exponent_estimate(&sys, &BigUint::zero(), &Caps::default()),
            Err(BoundsError::RegimeNotApplicable { .. })
        ));
    }

    #[test]
    fn same_exponent_bound_grows_with_t() {
        let err_sq = |t: u32| {
            BigUint::from(4u32).pow(2)
                * BigUint::from(2u32).pow(2 * t)
                * BigUint::from(3u32).pow(2 * (t - 1))
                * BigUint::from(5u32).pow(t - 2)
        };
        assert!(err_sq(3) < err_sq(4));
        assert!(err_sq(4) < err_sq(10));
    }

    #[test]
    fn existence_general_frozen_examples() {
        // n = 1, d_1 = 2, q = 149: the exact comparison 149^{t−2} > 12^{2t+2}
        // first holds at t = 439.
        let v = existence_general(149, 100, 1, 2).unwrap();
        assert!(!v.threshold_holds);
        assert_eq!(v.witness_inequality, "149^98 > 12^202");
        assert!(v.q_exceeds_simplified); // 149 > 144
        assert_eq!(v.simplified_q_threshold, BigUint::from(144u32));
        assert!(!existence_general(149, 438, 1, 2).unwrap().threshold_holds);
        assert!(existence_general(149, 439, 1, 2).unwrap().threshold_holds);

        assert!(matches!(
            existence_general(149, 2, 1, 2),
            Err(BoundsError::ShapeViolation(_))
        ));
    }

    #[test]
    fn mh_main_term_frozen_examples() {
        assert_eq!(mh_main_term(5, 5, 1).unwrap(), BigInt::from(250));
        assert_eq!(mh_main_term(7, 5, 1).unwrap(), BigInt::from(1176));
        assert!(matches!(mh_main_term(5, 5, 2), Err(BoundsError::ShapeViolation(_))));
        assert!(matches!(mh_main_term(2, 9, 1), Err(BoundsError::ShapeViolation(_))));
    }

    #[test]
    fn mh_main_term_forms_agree_on_grid() {
        // The integer and rational closed forms are asserted equal inside
        // mh_main_term; sweep a grid to exercise the assertion.
        for q in [3u64, 4, 5, 7, 8, 9, 11, 13, 25, 49] {
            for t in 4..=12usize {
                for n in 1..=t {
                    if 2 * n < t - 1 {
                        mh_main_term(q, t, n).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn mh_estimate_against_independent_enumeration() {
        // x₁⁶+x₂⁵+x₃⁴+x₄³+x₅² = x₁ − 1 over F_7, all coordinates nonzero,
        // counted by a direct loop independent of the counting engines.
        let f7 = build_field(7, 1).unwrap();
        let one = f7.decode(1).unwrap();
        let sys = DiagonalSystem::new(
            f7,
            vec![6, 5, 4, 3, 2],
            vec![vec![one.clone(); 5]],
            LhsFamily::PurePowers,
            RhsFamily::MarkoffHurwitz {
                constants: vec![one.clone()],
                mono_coeffs: vec![one.clone()],
                mono_exps: vec![vec![1]],
            },
        )
        .unwrap();

        let pow = |x: u64, e: u32| -> u64 { (0..e).fold(1u64, |acc, _| acc * x % 7) };
        let mut oracle = 0u64;
        for x1 in 1..7 {
            for x2 in 1..7 {
                for x3 in 1..7 {
                    for x4 in 1..7 {
                        for x5 in 1..7 {
                            let lhs = (pow(x1, 6) + pow(x2, 5) + pow(x3, 4) + pow(x4, 3)
                                + pow(x5, 2))
                                % 7;
                            if lhs == (x1 + 6) % 7 {
                                oracle += 1;
                            }
                        }
                    }
                }
            }
        }

        let report = count_nonzero(&sys, &Caps::default()).unwrap();
        assert_eq!(report.nonzero, BigUint::from(oracle));
        assert_eq!(report.total, report.nonzero.clone() + &report.with_zero);

        let estimate = mh_estimate(&sys, &report.nonzero, &Caps::default()).unwrap();
        assert_eq!(estimate.main_term, BigInt::from(1176));
        assert_eq!(
            estimate.error_bound_sq.unwrap(),
            BigUint::from(90u32).pow(12) * BigUint::from(7u32).pow(5)
        );
        assert_eq!(estimate.verdict, Verdict::Holds);
    }

    #[test]
    fn mh_existence_frozen_examples() {
        // n = 1, d_1 = 2 (constant 60): first true t at q = 4096 is 193.
        assert!(!mh_existence(4096, 192, 1, 2).unwrap().threshold_holds);
        assert!(mh_existence(4096, 193, 1, 2).unwrap().threshold_holds);
        assert!(!mh_existence(149, 1000, 1, 2).unwrap().threshold_holds);
        let v = mh_existence(4096, 193, 1, 2).unwrap();
        assert_eq!(v.simplified_q_threshold, BigUint::from(3600u32));
        assert!(v.q_exceeds_simplified);
        assert!(matches!(mh_existence(5, 2, 1, 2), Err(BoundsError::ShapeViolation(_))));
    }

    #[test]
    fn ni_bound_regimes() {
        // q = 7, t = 5, n = 1, d_1 = 3.
        let regime1 = ni_bound(1, 7, 5, 1, 3, 1);
        assert_eq!(
            regime1,
            NiBound::Estimate {
                main_term: BigUint::from(7u32).pow(3),
                error_bound_sq: BigUint::from(7u32).pow(4) * BigUint::from(18u32).pow(10),
            }
        );
        // Regime boundary: i = t−2n−1 = 2 estimates, i = t−2n = 3 does not.
        assert!(matches!(ni_bound(2, 7, 5, 1, 3, 1), NiBound::Estimate { .. }));
        assert_eq!(
            ni_bound(3, 7, 5, 1, 3, 1),
            NiBound::Upper { bound: BigUint::from(3u32) * BigUint::from(7u32) }
        );
        // i = t−n: exponent zero.
        assert_eq!(ni_bound(4, 7, 5, 1, 3, 1), NiBound::Upper { bound: BigUint::from(3u32) });
        // i > t−n (here i = t).
        assert_eq!(ni_bound(5, 7, 5, 1, 3, 1), NiBound::Upper { bound: BigUint::from(3u32) });
    }

    #[test]
    fn ni_bound_against_zero_set_counts() {
        // All-equal exponents d = 3 over F_7, b = 1: check each regime
        // against the observed per-cardinality spread of zero-set counts.
        let sys = constants_system(7, 1, &[3; 5], &[&[1, 1, 1, 1, 1]], &[1]);
        let report = count_nonzero(&sys, &Caps::default()).unwrap();
        for spread in &report.subset_spread {
            let i = spread.cardinality;
            match ni_bound(i, 7, 5, 1, 3, 0) {
                NiBound::Estimate { main_term, error_bound_sq } => {
                    let main = BigInt::from(main_term);
                    for v in [&spread.min, &spread.max] {
                        let diff = BigInt::from(v.clone()) - &main;
                        assert!(
                            &diff * &diff <= BigInt::from(error_bound_sq.clone()),
                            "cardinality {i}"
                        );
                    }
                }
                NiBound::Upper { bound } => {
                    assert!(spread.max <= bound, "cardinality {i}: {} > {bound}", spread.max);
                }
            }
        }
    }

    #[test]
    fn same_exponent_existence_frozen_examples() {
        // q = 149, d = 3, n = 1: minimal t is 294 by exact scan.
        let v = same_exponent_existence(149, 3, 1, 294);
        assert!(v.q_condition && v.threshold_holds);
        assert_eq!(v.minimal_t, Some(294));
        let v = same_exponent_existence(149, 3, 1, 293);
        assert!(!v.threshold_holds);

        // The reported interval brackets the real threshold in (293, 294).
        let threshold = v.threshold.unwrap();
        assert_eq!(threshold.exceeds_integer(293), Some(true));
        assert_eq!(threshold.exceeds_integer(294), Some(false));
        assert_eq!(threshold.ceiling(), Some(BigInt::from(294)));

        // q ≤ (4d)² = 144 refuses.
        let v = same_exponent_existence(100, 3, 1, 1000);
        assert!(!v.q_condition && !v.threshold_holds && v.minimal_t.is_none());

        // Large q: the threshold tends to n+1, so the minimal t tends to n+2.
        let v = same_exponent_existence(1 << 30, 2, 1, 3);
        assert!(v.threshold_holds);
        assert_eq!(v.minimal_t, Some(3));
    }

    #[test]
    fn waring_bound_frozen_examples() {
        // n = 1, d_1 = 2, q = 149: ⌈h(149)⌉ = 439, h ≈ 438.80.
        let w = waring_gamma_bound(1, 149, 2).unwrap();
        assert_eq!(w.gamma_upper, 439);
        assert!(w.h.lo_f64() > 438.79 && w.h.hi_f64() < 438.82);
        assert_eq!(w.h.ceiling(), Some(BigInt::from(439)));
        assert_eq!(w.witness_inequality, "149^437 >= 12^880");

        // q at the threshold is refused ((6·1·2)² = 144).
        assert!(matches!(
            waring_gamma_bound(1, 144, 2),
            Err(BoundsError::ThresholdNotMet { q: 144, .. })
        ));
        assert!(waring_gamma_bound(1, 145, 2).is_ok());

        // Large q: the bound reaches n+2.
        assert_eq!(waring_gamma_bound(1, 1 << 30, 2).unwrap().gamma_upper, 3);
    }

    #[test]
    fn waring_h_is_decreasing_and_above_n_plus_one() {
        let qs = [145u64, 149, 163, 211, 331, 1021, 65537];
        for (n, d1) in [(1usize, 2u64), (1, 3), (2, 2)] {
            let floor = BigUint::from(6 * n as u64 * d1).pow(2);
            let valid: Vec<u64> =
                qs.iter().copied().filter(|&q| BigUint::from(q) > floor).collect();
            let hs: Vec<ValueInterval> =
                valid.iter().map(|&q| waring_h(n, q, d1, 128).unwrap()).collect();
            for h in &hs {
                assert_eq!(h.exceeds_integer(n as i64 + 1), Some(true), "n={n} d1={d1}");
            }
            for pair in hs.windows(2) {
                assert_eq!(pair[1].strictly_below(&pair[0]), Some(true), "n={n} d1={d1}");
            }
        }
    }

    #[test]
    fn congruence_box_frozen_example() {
        // p = 31, t = 3, n = 1, d_1 = 4, margin 2: main (31−2)² = 841,
        // error 31·24⁴·2·2 = 41140224, verdict from the exact box count.
        let sys = constants_system(31, 1, &[4, 3, 2], &[&[1, 2, 3]], &[0]);
        let boxed = count_box(&sys, 2, &Caps::default()).unwrap();
        let report = congruence_box_estimate(31, 3, 1, 4, 2, &boxed.count).unwrap();
        assert_eq!(report.main_term, BigInt::from(841));
        assert_eq!(report.error_bound.unwrap(), BigUint::from(41140224u64));
        assert_eq!(report.verdict, Verdict::Holds);
    }

    #[test]
    fn congruence_box_preconditions_are_strict() {
        let n1 = BigUint::one();
        // m·2^{t−n} = p exactly: rejected.
        let err = congruence_box_estimate(32, 3, 1, 2, 8, &n1).unwrap_err();
        assert!(matches!(err, BoundsError::PreconditionFailed(ref m) if m.contains("m·2^(t−n)")));
        // p too small for p^{t−n−1} > 2^{2(t−n)}: 13 ≤ 16.
        let err = congruence_box_estimate(13, 3, 1, 2, 1, &n1).unwrap_err();
        assert!(matches!(err, BoundsError::PreconditionFailed(ref m) if m.contains("p^(t−n−1)")));
        // Degenerate margin.
        assert!(congruence_box_estimate(31, 3, 1, 2, 0, &n1).is_err());
        // t must exceed n.
        assert!(congruence_box_estimate(31, 2, 2, 2, 1, &n1).is_err());
    }

    #[test]
    fn verify_bijection_system() {
        let sys = constants_system(5, 1, &[3, 3, 3], &[&[1, 2, 3]], &[2]);
        let report = verify(&sys, &VerifyOptions::default(), &Caps::default()).unwrap();
        assert!(report.cross_checked);
        assert_eq!(report.total, BigUint::from(25u32));
        assert!(!report.critical);
        let main = report
            .bounds
            .iter()
            .find(|b| b.bound == BoundId::MainConstants)
            .expect("main bound applies");
        assert_eq!(main.main_term, BigInt::from(25));
        assert_eq!(main.verdict, Verdict::Holds);
    }

    #[test]
    fn verify_without_hypothesis_h_still_counts() {
        let sys = constants_system(5, 1, &[4, 3, 2], &[&[1, 0, 1]], &[0]);
        let report = verify(&sys, &VerifyOptions::default(), &Caps::default()).unwrap();
        assert!(report.bounds.is_empty() && report.existence.is_empty());
        assert!(!report.total.is_zero());
        assert!(!report.critical);
    }

    #[test]
    fn verify_markoff_hurwitz_system() {
        let f7 = build_field(7, 1).unwrap();
        let one = f7.decode(1).unwrap();
        let sys = DiagonalSystem::new(
            f7,
            vec![6, 5, 4, 3, 2],
            vec![vec![one.clone(); 5]],
            LhsFamily::PurePowers,
            RhsFamily::MarkoffHurwitz {
                constants: vec![one.clone()],
                mono_coeffs: vec![one.clone()],
                mono_exps: vec![vec![1]],
            },
        )
        .unwrap();
        let report = verify(&sys, &VerifyOptions::default(), &Caps::default()).unwrap();
        assert!(report.nonzero.is_some());
        assert!(report.bounds.iter().any(|b| b.bound == BoundId::MarkoffHurwitzEstimate));
        assert!(report
            .bounds
            .iter()
            .all(|b| matches!(b.verdict, Verdict::Holds | Verdict::NotApplicable)));
        assert!(!report.critical);
    }

    #[test]
    fn verify_box_margins() {
        let sys = constants_system(31, 1, &[4, 3, 2], &[&[1, 2, 3]], &[0]);
        let options = VerifyOptions { box_margins: vec![1, 2, 3] };
        let report = verify(&sys, &options, &Caps::default()).unwrap();
        let box_reports: Vec<_> =
            report.bounds.iter().filter(|b| b.bound == BoundId::CongruenceBox).collect();
        assert_eq!(box_reports.len(), 3);
        assert!(box_reports.iter().all(|b| b.verdict == Verdict::Holds));
        assert!(!report.critical);
    }
}
