//! Dickson polynomials `D_d(X, a)` over a finite field.
//!
//! The three-term recurrence is authoritative:
//!
//! ```text
//!   D_0 = 2,   D_1 = X,   D_j = X·D_{j−1} − a·D_{j−2}.
//! ```
//!
//! A closed form exists term by term,
//! `D_d = Σ_{i=0}^{⌊d/2⌋} d/(d−i) · C(d−i, i) · (−a)^i · X^{d−2i}`,
//! but the fraction `d/(d−i)` only makes sense in the field when no `d−i`
//! in range is divisible by the characteristic; [`dickson_closed_form`]
//! computes it under that proviso as an independent cross-check of the
//! recurrence and returns `None` otherwise.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::gf::{FieldElement, FieldSpec};

/// Coefficients of `D_d(X, a)`, low degree first, length `d + 1` (length 1
/// for `d = 0`). Computed by the recurrence.
pub fn dickson_coeffs(field: &FieldSpec, d: u64, a: &FieldElement) -> Vec<FieldElement> {
    let mut prev = vec![field.from_residue(2)]; // D_0 = 2
    if d == 0 {
        return prev;
    }
    let mut cur = vec![field.zero(), field.one()]; // D_1 = X
    for _ in 1..d {
        // next = X·cur − a·prev
        let mut next = vec![field.zero(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] = c.clone();
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] = field.sub(&next[i], &field.mul(a, c));
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// `D_d(x, a)` by the value recurrence, without materializing coefficients.
pub fn dickson_eval(field: &FieldSpec, d: u64, a: &FieldElement, x: &FieldElement) -> FieldElement {
    let mut prev = field.from_residue(2);
    if d == 0 {
        return prev;
    }
    let mut cur = x.clone();
    for _ in 1..d {
        let next = field.sub(&field.mul(x, &cur), &field.mul(a, &prev));
        prev = cur;
        cur = next;
    }
    cur
}

/// Closed-form coefficients, or `None` when some `d − i` (for
/// `0 ≤ i ≤ ⌊d/2⌋`) is divisible by the characteristic, which in particular
/// covers `char | d` at `i = 0`.
pub fn dickson_closed_form(
    field: &FieldSpec,
    d: u64,
    a: &FieldElement,
) -> Option<Vec<FieldElement>> {
    let p = field.p();
    if d == 0 {
        return Some(vec![field.from_residue(2)]);
    }
    for i in 0..=d / 2 {
        if (d - i) % p == 0 {
            return None;
        }
    }
    let mut coeffs = vec![field.zero(); d as usize + 1];
    let neg_a = field.neg(a);
    for i in 0..=d / 2 {
        let binom = binomial(d - i, i) % BigUint::from(p);
        let binom = field.from_residue(binom.to_u64().expect("residue fits"));
        let ratio = field
            .mul(&field.from_residue(d % p), &field.inv(&field.from_residue((d - i) % p)).ok()?);
        let term = field.mul(&field.mul(&ratio, &binom), &field.pow(&neg_a, i));
        coeffs[(d - 2 * i) as usize] = term;
    }
    Some(coeffs)
}

/// Checks `D_d(y + a/y, a) = y^d + (a/y)^d` for every `y ∈ F_q*`.
pub fn check_functional_identity(field: &FieldSpec, d: u64, a: &FieldElement) -> bool {
    for y in field.elements() {
        if field.is_zero(&y) {
            continue;
        }
        let a_over_y = field.mul(a, &field.inv(&y).expect("y is nonzero"));
        let lhs = dickson_eval(field, d, a, &field.add(&y, &a_over_y));
        let rhs = field.add(&field.pow(&y, d), &field.pow(&a_over_y, d));
        if lhs != rhs {
            return false;
        }
    }
    true
}

fn binomial(n: u64, k: u64) -> BigUint {
    let mut acc = BigUint::from(1u8);
    if k > n {
        return BigUint::from(0u8);
    }
    let k = k.min(n - k);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Evaluates a coefficient vector (low degree first) at `x`.
pub fn eval_coeffs(field: &FieldSpec, coeffs: &[FieldElement], x: &FieldElement) -> FieldElement {
    let mut acc = field.zero();
    for c in coeffs.iter().rev() {
        acc = field.add(&field.mul(&acc, x), c);
    }
    acc
}
