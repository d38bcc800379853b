//! Data model for systems of generalized diagonal equations.
//!
//! A [`DiagonalSystem`] is `n` equations in `t` unknowns over F_q,
//!
//! ```text
//!   a_{j1}·H_1(X_1) + … + a_{jt}·H_t(X_t) = g_j(X_1, …, X_k),   1 ≤ j ≤ n,
//! ```
//!
//! where the left-hand terms `H_i` are pure powers `X^{d_i}`, arbitrary
//! univariate polynomials of degree `d_i`, or Dickson polynomials, and the
//! right-hand sides are constants, sparse multivariate polynomials in the
//! first `k` variables, or Markoff–Hurwitz-type monomials `β_j·X_1^{c_j1}⋯
//! X_n^{c_jn} − a_j`.
//!
//! Construction checks only structural consistency (array lengths, element
//! ranges). Mathematical hypotheses — exponent pattern, characteristic
//! conditions, hypothesis (H), per-family degree constraints — are *reported*
//! by [`validate_system`], never thrown: an invalid system is data, not an
//! error.

mod poly;
pub mod wire;

pub use poly::SparsePoly;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::caps::{CapExceeded, Caps};
use crate::gf::{FieldElement, FieldError, FieldSpec};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Cap(#[from] CapExceeded),
    #[error("matrix rank is below the number of equations ({0})")]
    RankDeficient(usize),
    #[error("field of order {q} cannot produce an (H) matrix with n={n}, t={t} within the retry cap")]
    FieldTooSmall { q: u64, n: usize, t: usize },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown variant tag `{0}`")]
    UnknownVariantTag(String),
    #[error("element code {code} out of range for field of order {q}")]
    CodeOutOfRange { code: u64, q: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Left-hand term families `H_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LhsFamily {
    /// `H_i(X) = X^{d_i}`.
    PurePowers,
    /// `H_i = h_i`, an arbitrary univariate polynomial with `deg h_i = d_i`;
    /// coefficient lists low-to-high, length `d_i + 1`.
    UnivariateFamily(Vec<Vec<FieldElement>>),
    /// `H_i(X) = D_{d_i}(X, a_i)`, the Dickson polynomial with parameter `a_i`.
    Dickson(Vec<FieldElement>),
}

/// Right-hand side families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RhsFamily {
    /// `g_j = b_j`, constants.
    Constants(Vec<FieldElement>),
    /// `g_j` polynomials in the first `k` variables.
    Polynomials { k: usize, polys: Vec<SparsePoly> },
    /// `g_j = β_j·X_1^{c_j1}⋯X_n^{c_jn} − a_j` (so the equations read
    /// `Σ_i a_{ji}H_i(X_i) + a_j = β_j·X_1^{c_j1}⋯X_n^{c_jn}`).
    MarkoffHurwitz {
        constants: Vec<FieldElement>,
        mono_coeffs: Vec<FieldElement>,
        mono_exps: Vec<Vec<u64>>,
    },
}

/// A system of generalized diagonal equations. See the module docs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalSystem {
    pub field: FieldSpec,
    /// Exponents `d_1, …, d_t`.
    pub exponents: Vec<u64>,
    /// Coefficient matrix `A`, `n` rows by `t` columns.
    pub matrix: Vec<Vec<FieldElement>>,
    pub lhs: LhsFamily,
    pub rhs: RhsFamily,
}

impl DiagonalSystem {
    /// Structural constructor: validates dimensions and element membership,
    /// not mathematical hypotheses.
    pub fn new(
        field: FieldSpec,
        exponents: Vec<u64>,
        matrix: Vec<Vec<FieldElement>>,
        lhs: LhsFamily,
        rhs: RhsFamily,
    ) -> Result<DiagonalSystem, ModelError> {
        let t = exponents.len();
        let n = matrix.len();
        if n == 0 {
            return Err(ModelError::ShapeMismatch("matrix must have at least one row".into()));
        }
        for (j, row) in matrix.iter().enumerate() {
            if row.len() != t {
                return Err(ModelError::ShapeMismatch(format!(
                    "matrix row {} has {} entries, expected t={}",
                    j + 1,
                    row.len(),
                    t
                )));
            }
            for e in row {
                field.check_element(e)?;
            }
        }
        match &lhs {
            LhsFamily::PurePowers => {}
            LhsFamily::UnivariateFamily(polys) => {
                if polys.len() != t {
                    return Err(ModelError::ShapeMismatch(format!(
                        "lhs has {} polynomials, expected t={}",
                        polys.len(),
                        t
                    )));
                }
                for (i, h) in polys.iter().enumerate() {
                    if h.len() != exponents[i] as usize + 1 {
                        return Err(ModelError::ShapeMismatch(format!(
                            "h_{} has {} coefficients, expected d_{}+1 = {}",
                            i + 1,
                            h.len(),
                            i + 1,
                            exponents[i] + 1
                        )));
                    }
                    for c in h {
                        field.check_element(c)?;
                    }
                }
            }
            LhsFamily::Dickson(params) => {
                if params.len() != t {
                    return Err(ModelError::ShapeMismatch(format!(
                        "lhs has {} Dickson parameters, expected t={}",
                        params.len(),
                        t
                    )));
                }
                for a in params {
                    field.check_element(a)?;
                }
            }
        }
        match &rhs {
            RhsFamily::Constants(values) => {
                if values.len() != n {
                    return Err(ModelError::ShapeMismatch(format!(
                        "rhs has {} constants, expected n={}",
                        values.len(),
                        n
                    )));
                }
                for b in values {
                    field.check_element(b)?;
                }
            }
            RhsFamily::Polynomials { k, polys } => {
                if *k > t {
                    return Err(ModelError::ShapeMismatch(format!(
                        "rhs refers to k={} variables but the system has t={}",
                        k, t
                    )));
                }
                if polys.len() != n {
                    return Err(ModelError::ShapeMismatch(format!(
                        "rhs has {} polynomials, expected n={}",
                        polys.len(),
                        n
                    )));
                }
                for g in polys {
                    if g.vars() != *k {
                        return Err(ModelError::ShapeMismatch(format!(
                            "rhs polynomial has {} variables, expected k={}",
                            g.vars(),
                            k
                        )));
                    }
                    for (_, c) in g.terms() {
                        field.check_element(c)?;
                    }
                }
            }
            RhsFamily::MarkoffHurwitz { constants, mono_coeffs, mono_exps } => {
                if n > t {
                    return Err(ModelError::ShapeMismatch(format!(
                        "Markoff–Hurwitz monomials use the first n={} variables but the system has t={}",
                        n, t
                    )));
                }
                if constants.len() != n || mono_coeffs.len() != n || mono_exps.len() != n {
                    return Err(ModelError::ShapeMismatch(format!(
                        "Markoff–Hurwitz data must have n={} constants, coefficients and exponent rows",
                        n
                    )));
                }
                for row in mono_exps {
                    if row.len() != n {
                        return Err(ModelError::ShapeMismatch(format!(
                            "Markoff–Hurwitz exponent row has {} entries, expected n={}",
                            row.len(),
                            n
                        )));
                    }
                }
                for e in constants.iter().chain(mono_coeffs) {
                    field.check_element(e)?;
                }
            }
        }
        Ok(DiagonalSystem { field, exponents, matrix, lhs, rhs })
    }

    /// Number of variables `t`.
    pub fn num_vars(&self) -> usize {
        self.exponents.len()
    }

    /// Number of equations `n`.
    pub fn num_eqs(&self) -> usize {
        self.matrix.len()
    }

    /// Number of variables appearing on the right-hand side (`k`; 0 for
    /// constants, `n` for Markoff–Hurwitz).
    pub fn coupled_vars(&self) -> usize {
        match &self.rhs {
            RhsFamily::Constants(_) => 0,
            RhsFamily::Polynomials { k, .. } => *k,
            RhsFamily::MarkoffHurwitz { .. } => self.num_eqs(),
        }
    }

    /// Largest exponent `d_1`.
    pub fn d1(&self) -> u64 {
        self.exponents.first().copied().unwrap_or(0)
    }

    /// The right-hand sides as sparse polynomials in the coupled variables
    /// (constant polynomials when `k = 0`).
    pub fn rhs_as_polys(&self) -> Vec<SparsePoly> {
        let f = &self.field;
        match &self.rhs {
            RhsFamily::Constants(values) => {
                values.iter().map(|b| SparsePoly::constant(f, 0, b.clone())).collect()
            }
            RhsFamily::Polynomials { polys, .. } => polys.clone(),
            RhsFamily::MarkoffHurwitz { constants, mono_coeffs, mono_exps } => {
                let k = self.coupled_vars();
                constants
                    .iter()
                    .zip(mono_coeffs)
                    .zip(mono_exps)
                    .map(|((a, beta), exps)| {
                        SparsePoly::new(
                            f,
                            k,
                            vec![
                                (exps.clone(), beta.clone()),
                                (vec![0; k], f.neg(a)),
                            ],
                        )
                    })
                    .collect()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Regime headline for reports. The authoritative list of checks is
/// `regime_conditions`; this label names the family the system belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Regime {
    ThmMainConstants,
    ThmMainPolynomials,
    SameExponent,
    MarkoffHurwitz,
    VariantUnivariate,
    VariantDickson,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::ThmMainConstants => "thm_main_constants",
            Regime::ThmMainPolynomials => "thm_main_polynomials",
            Regime::SameExponent => "same_exponent",
            Regime::MarkoffHurwitz => "markoff_hurwitz",
            Regime::VariantUnivariate => "variant_univariate",
            Regime::VariantDickson => "variant_dickson",
        }
    }
}

/// Identifiers for the estimates the bounds module can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum BoundId {
    MainConstants,
    MainPolynomials,
    SameExponentZero,
    MarkoffHurwitzEstimate,
    ExistenceGeneral,
    ExistenceSameExponent,
    ExistenceMarkoffHurwitz,
    CongruenceBox,
}

impl BoundId {
    pub fn label(&self) -> &'static str {
        match self {
            BoundId::MainConstants => "main_constants",
            BoundId::MainPolynomials => "main_polynomials",
            BoundId::SameExponentZero => "same_exponent_zero",
            BoundId::MarkoffHurwitzEstimate => "markoff_hurwitz_estimate",
            BoundId::ExistenceGeneral => "existence_general",
            BoundId::ExistenceSameExponent => "existence_same_exponent",
            BoundId::ExistenceMarkoffHurwitz => "existence_markoff_hurwitz",
            BoundId::CongruenceBox => "congruence_box",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub regime: Regime,
    pub hypothesis_h: bool,
    pub char_ok: bool,
    pub shape_ok: bool,
    /// Named hypothesis checks, e.g. `("n <= t-2", true)`. Both readings of
    /// the polynomial-case shape condition — `n ≤ (t−1)/2` and the strict
    /// `n < (t−1)/2` — are recorded separately.
    pub regime_conditions: Vec<(String, bool)>,
    pub applicable_bounds: Vec<BoundId>,
}

impl ValidationReport {
    pub fn condition(&self, name: &str) -> Option<bool> {
        self.regime_conditions.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// True when every structural and hypothesis gate holds.
    pub fn all_gates_pass(&self) -> bool {
        self.hypothesis_h && self.char_ok && self.shape_ok
    }
}

/// Evaluates every model invariant and regime inequality. Mathematically
/// invalid systems produce reports, not errors; only the (H) subset cap can
/// fail.
pub fn validate_system(sys: &DiagonalSystem, caps: &Caps) -> Result<ValidationReport, ModelError> {
    let t = sys.num_vars();
    let n = sys.num_eqs();
    let k = sys.coupled_vars();
    let p = sys.field.p();
    let q = sys.field.order();
    let d = &sys.exponents;

    let n_le_t = n >= 1 && n <= t;
    let d_ge_2 = d.iter().all(|&di| di >= 2);
    let strictly_decreasing = t >= 1 && d.windows(2).all(|w| w[0] > w[1]);
    let all_equal = t >= 1 && d.iter().all(|&di| di == d[0]);
    let pattern_ok = strictly_decreasing || all_equal;
    let char_ok = d.iter().all(|&di| di % p != 0);
    let hypothesis_h = if n_le_t {
        check_hypothesis_h(&sys.field, &sys.matrix, caps)?
    } else {
        false
    };

    let d_t = d.last().copied().unwrap_or(0);
    let mut conditions: Vec<(String, bool)> = vec![
        ("1 <= n <= t".into(), n_le_t),
        ("d_i >= 2".into(), d_ge_2),
        ("exponents strictly decreasing".into(), strictly_decreasing),
        ("exponents all equal".into(), all_equal),
        ("char divides no d_i".into(), char_ok),
        ("hypothesis (H)".into(), hypothesis_h),
        ("n <= t-2".into(), t >= 2 && n <= t - 2),
        // Both published readings of the polynomial-case shape condition.
        ("n <= (t-1)/2".into(), t >= 1 && 2 * n <= t - 1),
        ("n < (t-1)/2".into(), t >= 1 && 2 * n < t - 1),
        ("t > 2n".into(), t > 2 * n),
        ("q > 2".into(), q > 2),
    ];

    // Family-specific structure.
    let mut family_ok = true;
    match &sys.lhs {
        LhsFamily::PurePowers => {}
        LhsFamily::UnivariateFamily(polys) => {
            let deg_exact = polys
                .iter()
                .zip(d)
                .all(|(h, &di)| h.len() == di as usize + 1 && !sys.field.is_zero(&h[di as usize]));
            conditions.push(("deg h_i = d_i".into(), deg_exact));
            family_ok &= deg_exact;
        }
        LhsFamily::Dickson(_) => {
            // Dickson polynomials have degree d_i by construction.
            conditions.push(("deg h_i = d_i".into(), true));
        }
    }
    match &sys.rhs {
        RhsFamily::Constants(_) => {}
        RhsFamily::Polynomials { k, polys } => {
            let k_ok = *k >= 1 && *k <= n;
            let deg_ok = polys.iter().all(|g| g.total_degree() < d_t);
            let nonconst = polys.iter().any(|g| !g.is_constant());
            conditions.push(("1 <= k <= n".into(), k_ok));
            conditions.push(("deg g_j < d_t".into(), deg_ok));
            conditions.push(("some g_j nonconstant".into(), nonconst));
            family_ok &= k_ok && deg_ok && nonconst;
        }
        RhsFamily::MarkoffHurwitz { constants, mono_coeffs, mono_exps } => {
            let betas_nonzero = mono_coeffs.iter().all(|b| !sys.field.is_zero(b));
            let some_a_nonzero = constants.iter().any(|a| !sys.field.is_zero(a));
            let exps_positive = mono_exps.iter().all(|row| row.iter().all(|&c| c >= 1));
            let deg_ok = mono_exps.iter().all(|row| row.iter().sum::<u64>() < d_t);
            conditions.push(("all beta_j nonzero".into(), betas_nonzero));
            conditions.push(("some a_j nonzero".into(), some_a_nonzero));
            conditions.push(("c_ji >= 1".into(), exps_positive));
            conditions.push(("sum_i c_ji < d_t".into(), deg_ok));
            family_ok &= betas_nonzero && some_a_nonzero && exps_positive && deg_ok;
        }
    }

    let shape_ok = n_le_t && d_ge_2 && pattern_ok && family_ok;

    let rhs_is_zero_constants = matches!(
        &sys.rhs,
        RhsFamily::Constants(values) if values.iter().all(|b| sys.field.is_zero(b))
    );
    let regime = match (&sys.rhs, &sys.lhs) {
        (RhsFamily::MarkoffHurwitz { .. }, _) => Regime::MarkoffHurwitz,
        (_, LhsFamily::UnivariateFamily(_)) => Regime::VariantUnivariate,
        (_, LhsFamily::Dickson(_)) => Regime::VariantDickson,
        (RhsFamily::Constants(_), LhsFamily::PurePowers)
            if all_equal && rhs_is_zero_constants && t > 1 =>
        {
            Regime::SameExponent
        }
        (RhsFamily::Constants(_), _) => Regime::ThmMainConstants,
        (RhsFamily::Polynomials { .. }, _) => Regime::ThmMainPolynomials,
    };

    // Bound applicability: gates plus each estimate's shape inequality.
    let base = hypothesis_h && char_ok && shape_ok;
    let cond = |name: &str, list: &[(String, bool)]| -> bool {
        list.iter().find(|(n, _)| n == name).map(|(_, v)| *v).unwrap_or(false)
    };
    let n_le_t2 = cond("n <= t-2", &conditions);
    let n_le_half = cond("n <= (t-1)/2", &conditions);
    let n_lt_half = cond("n < (t-1)/2", &conditions);
    let t_gt_2n = cond("t > 2n", &conditions);
    let q_gt_2 = cond("q > 2", &conditions);

    let mut applicable = Vec::new();
    let rhs_constants = matches!(&sys.rhs, RhsFamily::Constants(_));
    let rhs_coupled = !rhs_constants;
    let main_constants = base && rhs_constants && n_le_t2;
    let main_polynomials = base && rhs_coupled && k >= 1 && k <= n && n_le_half;
    if main_constants {
        applicable.push(BoundId::MainConstants);
    }
    if main_polynomials {
        applicable.push(BoundId::MainPolynomials);
    }
    let same_exponent_zero = base
        && all_equal
        && t > 1
        && matches!(&sys.lhs, LhsFamily::PurePowers)
        && rhs_is_zero_constants
        && n_le_t2;
    if same_exponent_zero {
        applicable.push(BoundId::SameExponentZero);
    }
    let mh_estimate =
        base && matches!(&sys.rhs, RhsFamily::MarkoffHurwitz { .. }) && n_lt_half && q_gt_2;
    if mh_estimate {
        applicable.push(BoundId::MarkoffHurwitzEstimate);
    }
    if (main_constants || main_polynomials) && t_gt_2n {
        applicable.push(BoundId::ExistenceGeneral);
    }
    if same_exponent_zero {
        applicable.push(BoundId::ExistenceSameExponent);
    }
    if mh_estimate && t_gt_2n {
        applicable.push(BoundId::ExistenceMarkoffHurwitz);
    }
    if base
        && sys.field.m() == 1
        && matches!(&sys.lhs, LhsFamily::PurePowers)
        && rhs_is_zero_constants
        && n_le_t2
    {
        applicable.push(BoundId::CongruenceBox);
    }

    Ok(ValidationReport {
        regime,
        hypothesis_h,
        char_ok,
        shape_ok,
        regime_conditions: conditions,
        applicable_bounds: applicable,
    })
}

// ---------------------------------------------------------------------------
// Hypothesis (H) and row echelon form
// ---------------------------------------------------------------------------

/// Rank of a matrix over F_q by Gaussian elimination (the matrix is consumed
/// as a working copy).
fn matrix_rank(field: &FieldSpec, mut rows: Vec<Vec<FieldElement>>) -> usize {
    let n = rows.len();
    if n == 0 {
        return 0;
    }
    let width = rows[0].len();
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot_row) = (rank..n).find(|&r| !field.is_zero(&rows[r][col])) else {
            continue;
        };
        rows.swap(rank, pivot_row);
        let inv = field.inv(&rows[rank][col]).expect("pivot is nonzero");
        for r in rank + 1..n {
            if field.is_zero(&rows[r][col]) {
                continue;
            }
            let factor = field.mul(&rows[r][col], &inv);
            for c in col..width {
                let sub = field.mul(&factor, &rows[rank][c]);
                rows[r][c] = field.sub(&rows[r][c], &sub);
            }
        }
        rank += 1;
        if rank == n {
            break;
        }
    }
    rank
}

fn binomial(t: usize, n: usize) -> num_bigint::BigUint {
    let mut acc = num_bigint::BigUint::from(1u8);
    for i in 0..n.min(t.saturating_sub(n)) {
        acc = acc * num_bigint::BigUint::from(t - i) / num_bigint::BigUint::from(i + 1);
    }
    if n > t {
        num_bigint::BigUint::from(0u8)
    } else {
        acc
    }
}

/// Hypothesis (H): every n×n column-submatrix of `A` has rank n. Exhaustive
/// over all C(t, n) column subsets, each checked by Gaussian elimination.
pub fn check_hypothesis_h(
    field: &FieldSpec,
    a: &[Vec<FieldElement>],
    caps: &Caps,
) -> Result<bool, ModelError> {
    let n = a.len();
    let t = a.first().map(|r| r.len()).unwrap_or(0);
    if n > t {
        return Err(ModelError::ShapeMismatch(format!(
            "hypothesis (H) needs n <= t, got n={n}, t={t}"
        )));
    }
    Caps::check("subsets", caps.subsets, &binomial(t, n))?;

    // Lexicographic odometer over n-element column subsets.
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let submatrix: Vec<Vec<FieldElement>> =
            a.iter().map(|row| subset.iter().map(|&c| row[c].clone()).collect()).collect();
        if matrix_rank(field, submatrix) < n {
            return Ok(false);
        }
        // Advance the odometer.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(true);
            }
            i -= 1;
            if subset[i] != i + t - n {
                subset[i] += 1;
                for j in i + 1..n {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Row echelon decomposition `M·A = Â` with the transformed right-hand
/// sides `ĝ = M·g`.
#[derive(Debug, Clone)]
pub struct EchelonDecomposition {
    /// Invertible n×n transformation.
    pub m_matrix: Vec<Vec<FieldElement>>,
    /// `A` in row echelon form.
    pub a_hat: Vec<Vec<FieldElement>>,
    /// Zero-based pivot column indices, strictly increasing. Under
    /// hypothesis (H) these are `0, 1, …, n−1`.
    pub pivots: Vec<usize>,
    /// Transformed right-hand sides, as polynomials in the coupled variables.
    pub g_hat: Vec<SparsePoly>,
}

/// Gaussian elimination with recorded row operations; the pivot of each step
/// is the first nonzero entry in scan order (columns left to right, rows top
/// to bottom), making the output deterministic.
pub fn row_echelon_form(sys: &DiagonalSystem) -> Result<EchelonDecomposition, ModelError> {
    let field = &sys.field;
    let n = sys.num_eqs();
    let t = sys.num_vars();
    let mut a: Vec<Vec<FieldElement>> = sys.matrix.clone();
    let mut m: Vec<Vec<FieldElement>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { field.one() } else { field.zero() }).collect())
        .collect();
    let mut pivots = Vec::with_capacity(n);

    let mut row = 0;
    for col in 0..t {
        if row == n {
            break;
        }
        let Some(pivot_row) = (row..n).find(|&r| !field.is_zero(&a[r][col])) else {
            continue;
        };
        a.swap(row, pivot_row);
        m.swap(row, pivot_row);
        pivots.push(col);
        let inv = field.inv(&a[row][col]).expect("pivot is nonzero");
        for r in row + 1..n {
            if field.is_zero(&a[r][col]) {
                continue;
            }
            let factor = field.mul(&a[r][col], &inv);
            for c in 0..t {
                let sub = field.mul(&factor, &a[row][c]);
                a[r][c] = field.sub(&a[r][c], &sub);
            }
            for c in 0..n {
                let sub = field.mul(&factor, &m[row][c]);
                m[r][c] = field.sub(&m[r][c], &sub);
            }
        }
        row += 1;
    }
    if row < n {
        return Err(ModelError::RankDeficient(n));
    }

    let g = sys.rhs_as_polys();
    let k = sys.coupled_vars();
    let g_hat = (0..n)
        .map(|j| {
            let mut acc = SparsePoly::zero(k);
            for (l, gl) in g.iter().enumerate() {
                acc = acc.add(field, &gl.scale(field, &m[j][l]));
            }
            acc
        })
        .collect();

    Ok(EchelonDecomposition { m_matrix: m, a_hat: a, pivots, g_hat })
}

// ---------------------------------------------------------------------------
// Instance generation
// ---------------------------------------------------------------------------

/// Cauchy matrix `a_{ij} = 1/(x_i − y_j)`; all `x_i`, `y_j` must be pairwise
/// distinct, which makes every square submatrix nonsingular.
pub fn cauchy_matrix(
    field: &FieldSpec,
    xs: &[FieldElement],
    ys: &[FieldElement],
) -> Vec<Vec<FieldElement>> {
    xs.iter()
        .map(|x| {
            ys.iter()
                .map(|y| field.inv(&field.sub(x, y)).expect("x_i and y_j are distinct"))
                .collect()
        })
        .collect()
}

/// Deterministic n×t matrix satisfying hypothesis (H).
///
/// When `q ≥ n + t`, draws `n + t` distinct elements from the seeded stream
/// and returns the Cauchy matrix, which satisfies (H) structurally. Smaller
/// fields fall back to seeded rejection sampling filtered through
/// [`check_hypothesis_h`], bounded by `caps.generator_retries`.
pub fn generate_h_matrix(
    n: usize,
    t: usize,
    field: &FieldSpec,
    seed: u64,
    caps: &Caps,
) -> Result<Vec<Vec<FieldElement>>, ModelError> {
    assert!(n >= 1 && t >= 1, "matrix dimensions must be positive");
    let q = field.order();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if q as u128 >= (n + t) as u128 {
        let mut chosen: Vec<u64> = Vec::with_capacity(n + t);
        while chosen.len() < n + t {
            let code = rng.gen_range(0..q);
            if !chosen.contains(&code) {
                chosen.push(code);
            }
        }
        let elems: Vec<FieldElement> =
            chosen.iter().map(|&c| field.decode(c).expect("code < q")).collect();
        let matrix = cauchy_matrix(field, &elems[..n], &elems[n..]);
        debug_assert!(
            binomial(t, n) > num_bigint::BigUint::from(caps.subsets)
                || check_hypothesis_h(field, &matrix, caps).unwrap_or(true),
            "Cauchy matrix must satisfy (H)"
        );
        return Ok(matrix);
    }
    for _ in 0..caps.generator_retries {
        let matrix: Vec<Vec<FieldElement>> = (0..n)
            .map(|_| {
                (0..t).map(|_| field.decode(rng.gen_range(0..q)).expect("code < q")).collect()
            })
            .collect();
        if check_hypothesis_h(field, &matrix, caps)? {
            return Ok(matrix);
        }
    }
    Err(ModelError::FieldTooSmall { q, n, t })
}
