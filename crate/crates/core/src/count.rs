//! Exact solution counting for diagonal systems.
//!
//! Two independent engines compute `N = #{x ∈ F_q^t : A·H(x) = g(x)}`:
//!
//! * **brute force** — a recursive odometer over all admissible coordinate
//!   tuples, carrying per-equation partial sums; the reference oracle.
//! * **convolution** — one pass per variable over its value distribution in
//!   F_q^n, folded by additive convolution; right-hand-coupled variables are
//!   enumerated as branches on top of a single shared fold.
//!
//! Both engines work in the original coordinates and use exact big-integer
//! arithmetic throughout. Restricted counts (all coordinates nonzero, boxed
//! prime-field coordinates, coordinates pinned to zero) build on the same
//! two engines, and [`count_nonzero`] cross-checks the direct nonzero count
//! against inclusion–exclusion over zero sets — a disagreement is reported
//! as [`CountError::EngineMismatch`] and means a bug, never bad input.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::caps::{CapExceeded, Caps};
use crate::dickson::{dickson_eval, eval_coeffs};
use crate::gf::{CodeArith, FieldElement, FieldSpec};
use crate::model::{DiagonalSystem, LhsFamily, RhsFamily, SparsePoly};

#[derive(Debug, Error)]
pub enum CountError {
    #[error(transparent)]
    Cap(#[from] CapExceeded),
    #[error("boxed counting requires a prime field (m = 1), got m = {0}")]
    NotPrimeField(usize),
    #[error("margin {margin} leaves fewer than two admissible coordinate values in F_{p}")]
    InvalidMargin { margin: u64, p: u64 },
    #[error("internal engine disagreement in {context}: {lhs} != {rhs}")]
    EngineMismatch { context: String, lhs: BigUint, rhs: BigUint },
}

/// Which coordinate tuples are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    /// All of F_q^t.
    All,
    /// Tuples with every coordinate nonzero.
    NonzeroCoords,
    /// Prime fields only: every coordinate in `{0, 1, …, p − margin − 1}`.
    Box { margin: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    BruteForce,
    Convolution,
}

impl Engine {
    pub fn label(&self) -> &'static str {
        match self {
            Engine::BruteForce => "bruteforce",
            Engine::Convolution => "convolution",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionCount {
    pub count: BigUint,
    pub engine: Engine,
}

// ---------------------------------------------------------------------------
// Shared tables
// ---------------------------------------------------------------------------

/// `H_i(x)` for the system's left-hand family.
fn lhs_value(sys: &DiagonalSystem, i: usize, x: &FieldElement) -> FieldElement {
    let f = &sys.field;
    match &sys.lhs {
        LhsFamily::PurePowers => f.pow(x, sys.exponents[i]),
        LhsFamily::UnivariateFamily(polys) => eval_coeffs(f, &polys[i], x),
        LhsFamily::Dickson(params) => dickson_eval(f, sys.exponents[i], &params[i], x),
    }
}

/// Admissible coordinate codes under a restriction, shared by both engines.
fn admissible_codes(field: &FieldSpec, restriction: Restriction) -> Result<Vec<u64>, CountError> {
    let q = field.order();
    match restriction {
        Restriction::All => Ok((0..q).collect()),
        Restriction::NonzeroCoords => Ok((1..q).collect()),
        Restriction::Box { margin } => {
            if field.m() != 1 {
                return Err(CountError::NotPrimeField(field.m()));
            }
            let p = field.p();
            if margin > p.saturating_sub(2) {
                return Err(CountError::InvalidMargin { margin, p });
            }
            Ok((0..p - margin).collect())
        }
    }
}

/// `contrib[i][x][j] = code(a_{ji}·H_i(x))` for the given variables.
fn contribution_tables(sys: &DiagonalSystem, vars: std::ops::Range<usize>) -> Vec<Vec<Vec<u64>>> {
    let f = &sys.field;
    let n = sys.num_eqs();
    let elems: Vec<FieldElement> = f.elements().collect();
    let mut tables = Vec::with_capacity(vars.len());
    for i in vars {
        let mut per_var = Vec::with_capacity(elems.len());
        for x in &elems {
            let hx = lhs_value(sys, i, x);
            let row: Vec<u64> =
                (0..n).map(|j| f.encode(&f.mul(&sys.matrix[j][i], &hx))).collect();
            per_var.push(row);
        }
        tables.push(per_var);
    }
    tables
}

fn tuple_index(codes: &[u64], q: u64) -> usize {
    let mut idx = 0u64;
    for &c in codes.iter().rev() {
        idx = idx * q + c;
    }
    idx as usize
}

// ---------------------------------------------------------------------------
// Distributions and the convolution engine
// ---------------------------------------------------------------------------

/// A function `F_q^n → ℕ`, dense over mixed-radix tuple codes
/// `idx = Σ_j v_j·q^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    pub n: usize,
    pub q: u64,
    pub counts: Vec<BigUint>,
}

impl Distribution {
    /// The fold identity: all mass at the zero tuple.
    pub fn point_mass(n: usize, q: u64) -> Distribution {
        let size = (q as usize).pow(n as u32);
        let mut counts = vec![BigUint::zero(); size];
        counts[0] = BigUint::one();
        Distribution { n, q, counts }
    }

    pub fn get(&self, codes: &[u64]) -> &BigUint {
        &self.counts[tuple_index(codes, self.q)]
    }

    /// Additive convolution `(self * other)(w) = Σ_{v+s=w} self(v)·other(s)`,
    /// iterating the support of `other` with per-support-point component
    /// maps.
    pub fn fold(&self, other: &Distribution, field: &FieldSpec) -> Distribution {
        self.fold_with(other, &CodeArith::new(field))
    }

    pub(crate) fn fold_with(&self, other: &Distribution, arith: &CodeArith) -> Distribution {
        assert_eq!(self.n, other.n, "distribution dimensions must agree");
        assert_eq!(self.q, other.q, "distribution fields must agree");
        let n = self.n;
        let q = self.q;
        let mut out = vec![BigUint::zero(); self.counts.len()];
        let qpow: Vec<u64> = (0..n).scan(1u64, |acc, _| {
            let v = *acc;
            *acc *= q;
            Some(v)
        }).collect();

        for (sidx, scount) in other.counts.iter().enumerate() {
            if scount.is_zero() {
                continue;
            }
            // Decompose the support point and precompute the per-coordinate
            // shift maps digit ↦ digit + s_j.
            let mut rem = sidx as u64;
            let maps: Vec<Vec<u64>> = (0..n)
                .map(|_| {
                    let sj = rem % q;
                    rem /= q;
                    (0..q).map(|vd| arith.add(vd, sj)).collect()
                })
                .collect();

            let mut digits = vec![0u64; n];
            for (vidx, av) in self.counts.iter().enumerate() {
                if vidx > 0 {
                    // Odometer increment of the digit vector.
                    for d in digits.iter_mut() {
                        *d += 1;
                        if *d == q {
                            *d = 0;
                        } else {
                            break;
                        }
                    }
                }
                if av.is_zero() {
                    continue;
                }
                let mut w = 0u64;
                for j in 0..n {
                    w += maps[j][digits[j] as usize] * qpow[j];
                }
                out[w as usize] += av * scount;
            }
        }
        Distribution { n, q, counts: out }
    }
}

/// Distribution of variable `i`'s column contribution
/// `v = (a_{1i}·H_i(x), …, a_{ni}·H_i(x))` over admissible `x`.
pub fn variable_distribution(
    sys: &DiagonalSystem,
    i: usize,
    restriction: Restriction,
    caps: &Caps,
) -> Result<Distribution, CountError> {
    let n = sys.num_eqs();
    let q = sys.field.order();
    check_distribution_size(q, n, caps)?;
    let codes = admissible_codes(&sys.field, restriction)?;
    let tables = contribution_tables(sys, i..i + 1);
    let mut counts = vec![BigUint::zero(); (q as usize).pow(n as u32)];
    for &x in &codes {
        counts[tuple_index(&tables[0][x as usize], q)] += 1u32;
    }
    Ok(Distribution { n, q, counts })
}

fn check_distribution_size(q: u64, n: usize, caps: &Caps) -> Result<(), CapExceeded> {
    let size = BigUint::from(q).pow(n as u32);
    Caps::check("distribution_size", caps.distribution_size, &size)
}

/// Fold of all right-hand-uncoupled variables (`x_{k+1}, …, x_t`), starting
/// from the point mass. For a constants right-hand side (`k = 0`) this is
/// the full solution-count distribution: `N_b = dist.get(b)` for every
/// target tuple `b`, all from one shared fold.
pub fn uncoupled_distribution(
    sys: &DiagonalSystem,
    restriction: Restriction,
    caps: &Caps,
) -> Result<Distribution, CountError> {
    let n = sys.num_eqs();
    let q = sys.field.order();
    check_distribution_size(q, n, caps)?;
    let arith = CodeArith::new(&sys.field);
    let mut acc = Distribution::point_mass(n, q);
    for i in sys.coupled_vars()..sys.num_vars() {
        let c = variable_distribution(sys, i, restriction, caps)?;
        acc = acc.fold_with(&c, &arith);
    }
    Ok(acc)
}

/// Convolution engine: one shared fold of the uncoupled variables, then one
/// branch per admissible assignment of the coupled prefix `x_1, …, x_k`,
/// each contributing `dist(g(x) − Σ_{i≤k} a_i·H_i(x_i))`.
pub fn count_convolution(
    sys: &DiagonalSystem,
    restriction: Restriction,
    caps: &Caps,
) -> Result<SolutionCount, CountError> {
    let f = &sys.field;
    let n = sys.num_eqs();
    let k = sys.coupled_vars();
    let codes = admissible_codes(f, restriction)?;

    let branches = BigUint::from(codes.len()).pow(k as u32);
    Caps::check("coupled_branches", caps.distribution_size, &branches)?;

    let acc = uncoupled_distribution(sys, restriction, caps)?;
    let arith = CodeArith::new(f);
    let polys = sys.rhs_as_polys();
    let coupled_tables = contribution_tables(sys, 0..k);
    let elems: Vec<FieldElement> = f.elements().collect();

    let mut total = BigUint::zero();
    // Odometer over the coupled branches (single empty branch when k = 0).
    let mut branch = vec![0usize; k];
    loop {
        let point: Vec<FieldElement> =
            branch.iter().map(|&bi| elems[codes[bi] as usize].clone()).collect();
        let mut target = vec![0u64; n];
        for (j, t) in target.iter_mut().enumerate() {
            let mut g = f.encode(&polys[j].eval(f, &point));
            for (i, bi) in branch.iter().enumerate() {
                g = arith.sub(g, coupled_tables[i][codes[*bi] as usize][j]);
            }
            *t = g;
        }
        total += acc.get(&target);

        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(SolutionCount { count: total, engine: Engine::Convolution });
            }
            branch[pos] += 1;
            if branch[pos] < codes.len() {
                break;
            }
            branch[pos] = 0;
            pos += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Brute-force engine
// ---------------------------------------------------------------------------

struct BruteCtx<'a> {
    field: &'a FieldSpec,
    arith: CodeArith,
    admissible: Vec<u64>,
    contrib: Vec<Vec<Vec<u64>>>,
    polys: Vec<SparsePoly>,
    elems: Vec<FieldElement>,
    k: usize,
    n: usize,
    t: usize,
}

impl BruteCtx<'_> {
    fn eval_targets(&self, prefix: &[u64]) -> Vec<u64> {
        let point: Vec<FieldElement> =
            prefix.iter().map(|&c| self.elems[c as usize].clone()).collect();
        self.polys.iter().map(|g| self.field.encode(&g.eval(self.field, &point))).collect()
    }

    /// Depths below `k`: extend the coupled prefix, then hand over to the
    /// target-checked tail.
    fn recurse(&self, depth: usize, sums: &mut [u64], prefix: &mut Vec<u64>) -> u64 {
        if depth == self.k {
            let targets = self.eval_targets(prefix);
            return self.tail(depth, sums, &targets);
        }
        let mut total = 0u64;
        for &x in &self.admissible {
            for j in 0..self.n {
                sums[j] = self.arith.add(sums[j], self.contrib[depth][x as usize][j]);
            }
            prefix.push(x);
            total += self.recurse(depth + 1, sums, prefix);
            prefix.pop();
            for j in 0..self.n {
                sums[j] = self.arith.sub(sums[j], self.contrib[depth][x as usize][j]);
            }
        }
        total
    }

    fn tail(&self, depth: usize, sums: &mut [u64], targets: &[u64]) -> u64 {
        if depth == self.t {
            return u64::from(sums == targets);
        }
        let mut total = 0u64;
        for &x in &self.admissible {
            for j in 0..self.n {
                sums[j] = self.arith.add(sums[j], self.contrib[depth][x as usize][j]);
            }
            total += self.tail(depth + 1, sums, targets);
            for j in 0..self.n {
                sums[j] = self.arith.sub(sums[j], self.contrib[depth][x as usize][j]);
            }
        }
        total
    }

    /// One top-level branch with `x_1` pinned, used for parallel chunking.
    fn from_first(&self, x0: u64) -> u64 {
        let mut sums: Vec<u64> = self.contrib[0][x0 as usize].clone();
        if self.k == 0 {
            let targets = self.eval_targets(&[]);
            self.tail(1, &mut sums, &targets)
        } else {
            let mut prefix = vec![x0];
            self.recurse(1, &mut sums, &mut prefix)
        }
    }
}

const PARALLEL_THRESHOLD: u64 = 1 << 16;

/// Reference engine: enumerates every admissible tuple.
pub fn count_bruteforce(
    sys: &DiagonalSystem,
    restriction: Restriction,
    caps: &Caps,
) -> Result<SolutionCount, CountError> {
    let t = sys.num_vars();
    let codes = admissible_codes(&sys.field, restriction)?;
    let cost = BigUint::from(codes.len()).pow(t as u32);
    Caps::check("bruteforce_evals", caps.bruteforce_evals, &cost)?;
    let cost = cost.to_u64().expect("cost within cap fits u64");

    let ctx = BruteCtx {
        field: &sys.field,
        arith: CodeArith::new(&sys.field),
        admissible: codes,
        contrib: contribution_tables(sys, 0..t),
        polys: sys.rhs_as_polys(),
        elems: sys.field.elements().collect(),
        k: sys.coupled_vars(),
        n: sys.num_eqs(),
        t,
    };

    let count = if t == 0 {
        let targets = ctx.eval_targets(&[]);
        u64::from(targets.iter().all(|&c| c == 0))
    } else if cost >= PARALLEL_THRESHOLD && ctx.admissible.len() >= 2 {
        ctx.admissible
            .par_iter()
            .map(|&x0| ctx.from_first(x0))
            .collect::<Vec<u64>>()
            .into_iter()
            .sum()
    } else {
        let mut sums = vec![0u64; ctx.n];
        let mut prefix = Vec::with_capacity(ctx.k);
        ctx.recurse(0, &mut sums, &mut prefix)
    };
    Ok(SolutionCount { count: BigUint::from(count), engine: Engine::BruteForce })
}

// ---------------------------------------------------------------------------
// Dispatch and restricted counts
// ---------------------------------------------------------------------------

/// Counts solutions with the cheapest applicable engine: convolution when
/// the distribution fits the cap, brute force otherwise.
pub fn count_solutions(
    sys: &DiagonalSystem,
    restriction: Restriction,
    caps: &Caps,
) -> Result<SolutionCount, CountError> {
    let q = BigUint::from(sys.field.order());
    let size = q.pow(sys.num_eqs() as u32);
    let branches = q.pow(sys.coupled_vars() as u32);
    if size <= BigUint::from(caps.distribution_size) && branches <= BigUint::from(caps.distribution_size)
    {
        count_convolution(sys, restriction, caps)
    } else {
        count_bruteforce(sys, restriction, caps)
    }
}

/// Boxed count: prime field, every coordinate in `{0, …, p − margin − 1}`,
/// evaluated by the reference engine.
pub fn count_box(sys: &DiagonalSystem, margin: u64, caps: &Caps) -> Result<SolutionCount, CountError> {
    count_bruteforce(sys, Restriction::Box { margin }, caps)
}

/// The reduced system obtained by pinning `zero_vars` (0-based, strictly
/// increasing) to zero: those variables disappear, their left-hand values at
/// zero move into the right-hand side, and coupled right-hand variables are
/// substituted away.
pub fn reduced_zero_system(sys: &DiagonalSystem, zero_vars: &[usize]) -> DiagonalSystem {
    debug_assert!(zero_vars.windows(2).all(|w| w[0] < w[1]), "zero set must be sorted");
    let f = &sys.field;
    let t = sys.num_vars();
    let k = sys.coupled_vars();

    // Right-hand sides as polynomials in the original coupled prefix.
    let mut polys = sys.rhs_as_polys();
    // Substitute coupled zeros in descending index order so indices stay
    // valid, and fold every pinned variable's left-hand value into the
    // constant term: g_j ← g_j − a_{ji}·H_i(0).
    for &i in zero_vars.iter().rev() {
        let h0 = lhs_value(sys, i, &f.zero());
        for (j, g) in polys.iter_mut().enumerate() {
            let delta = f.neg(&f.mul(&sys.matrix[j][i], &h0));
            let mut reduced = if i < k { g.substitute_zero(f, i) } else { g.clone() };
            reduced = reduced.add_constant(f, &delta);
            *g = reduced;
        }
    }

    let keep: Vec<usize> = (0..t).filter(|i| !zero_vars.contains(i)).collect();
    let new_k = keep.iter().filter(|&&i| i < k).count();
    debug_assert!(keep.iter().take(new_k).enumerate().all(|(pos, &i)| i < k && pos < new_k));

    let exponents: Vec<u64> = keep.iter().map(|&i| sys.exponents[i]).collect();
    let matrix: Vec<Vec<FieldElement>> =
        sys.matrix.iter().map(|row| keep.iter().map(|&i| row[i].clone()).collect()).collect();
    let lhs = match &sys.lhs {
        LhsFamily::PurePowers => LhsFamily::PurePowers,
        LhsFamily::UnivariateFamily(hs) => {
            LhsFamily::UnivariateFamily(keep.iter().map(|&i| hs[i].clone()).collect())
        }
        LhsFamily::Dickson(params) => {
            LhsFamily::Dickson(keep.iter().map(|&i| params[i].clone()).collect())
        }
    };
    let rhs = if new_k == 0 {
        RhsFamily::Constants(polys.iter().map(|g| g.constant_term(f)).collect())
    } else {
        RhsFamily::Polynomials { k: new_k, polys }
    };
    DiagonalSystem::new(f.clone(), exponents, matrix, lhs, rhs)
        .expect("reduction preserves structural validity")
}

/// `N_S`: solutions whose coordinates in `zero_vars` are zero (the rest
/// unrestricted).
pub fn count_zero_set(
    sys: &DiagonalSystem,
    zero_vars: &[usize],
    caps: &Caps,
) -> Result<SolutionCount, CountError> {
    count_solutions(&reduced_zero_system(sys, zero_vars), Restriction::All, caps)
}

/// Observed range of zero-set counts over all subsets of one cardinality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetSpread {
    pub cardinality: usize,
    pub min: BigUint,
    pub max: BigUint,
}

impl SubsetSpread {
    /// Whether every subset of this cardinality produced the same count —
    /// observed, never assumed.
    pub fn symmetric(&self) -> bool {
        self.min == self.max
    }
}

/// Full zero/nonzero accounting for a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonzeroReport {
    /// `N`, over all of F_q^t.
    pub total: BigUint,
    /// `N*`, all coordinates nonzero (computed directly).
    pub nonzero: BigUint,
    /// `N^=`, at least one zero coordinate, by inclusion–exclusion.
    pub with_zero: BigUint,
    /// Entry `i`: solutions with exactly `i` zero coordinates, `0 ≤ i ≤ t`.
    pub zeros_profile: Vec<BigUint>,
    /// Zero-set count ranges per subset cardinality `1, …, t`.
    pub subset_spread: Vec<SubsetSpread>,
}

/// Computes `N`, `N*` and `N^=`, verifying `N = N* + N^=` by two independent
/// routes, plus the exact-zeros profile. The inclusion–exclusion route
/// enumerates all `2^t − 1` nonempty zero sets.
pub fn count_nonzero(sys: &DiagonalSystem, caps: &Caps) -> Result<NonzeroReport, CountError> {
    let t = sys.num_vars();
    Caps::check("subsets", caps.subsets, &(BigUint::one() << t))?;

    let total = count_solutions(sys, Restriction::All, caps)?.count;
    let nonzero = count_solutions(sys, Restriction::NonzeroCoords, caps)?.count;

    let mut signed_ie = BigInt::zero();
    let mut zeros_profile = vec![BigUint::zero(); t + 1];
    zeros_profile[0] = nonzero.clone();
    let mut spread: Vec<Option<SubsetSpread>> = vec![None; t];

    for mask in 1u64..(1u64 << t) {
        let zero_vars: Vec<usize> = (0..t).filter(|i| mask >> i & 1 == 1).collect();
        let card = zero_vars.len();
        let reduced = reduced_zero_system(sys, &zero_vars);
        let n_s = count_solutions(&reduced, Restriction::All, caps)?.count;
        let exact = count_solutions(&reduced, Restriction::NonzeroCoords, caps)?.count;

        let signed = BigInt::from(n_s.clone());
        if card % 2 == 1 {
            signed_ie += signed;
        } else {
            signed_ie -= signed;
        }
        zeros_profile[card] += exact;
        match &mut spread[card - 1] {
            None => {
                spread[card - 1] =
                    Some(SubsetSpread { cardinality: card, min: n_s.clone(), max: n_s })
            }
            Some(s) => {
                if n_s < s.min {
                    s.min = n_s.clone();
                }
                if n_s > s.max {
                    s.max = n_s;
                }
            }
        }
    }

    debug_assert!(!signed_ie.is_negative(), "inclusion–exclusion of counts is nonnegative");
    let with_zero = signed_ie.to_biguint().ok_or_else(|| CountError::EngineMismatch {
        context: "inclusion-exclusion sign".into(),
        lhs: total.clone(),
        rhs: BigUint::zero(),
    })?;

    if nonzero.clone() + &with_zero != total {
        return Err(CountError::EngineMismatch {
            context: "nonzero count (direct vs inclusion-exclusion)".into(),
            lhs: nonzero,
            rhs: total - with_zero,
        });
    }
    let profile_sum: BigUint = zeros_profile.iter().sum();
    if profile_sum != total {
        return Err(CountError::EngineMismatch {
            context: "zeros profile sum".into(),
            lhs: profile_sum,
            rhs: total,
        });
    }

    Ok(NonzeroReport {
        total,
        nonzero,
        with_zero,
        zeros_profile,
        subset_spread: spread.into_iter().flatten().collect(),
    })
}
