//! Exact arithmetic in finite fields F_{p^m}.
//!
//! A field is described by a [`FieldSpec`]: the characteristic `p`, the
//! extension degree `m`, and a deterministic choice of monic irreducible
//! modulus, so the same `(p, m)` always denotes the same concrete field.
//! Elements are residue-class polynomials of degree `< m` stored low-to-high.
//!
//! Every element has a canonical integer code `Σ coeffs[j]·p^j`; this codec
//! (code 0 = zero element) is the single wire representation used by all
//! file formats, and [`FieldSpec::elements`] enumerates in code order.

use num_bigint::BigUint;
use thiserror::Error;

use crate::caps::{CapExceeded, Caps};

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    DegreeZero,
    #[error(transparent)]
    Cap(#[from] CapExceeded),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("element {element:?} does not belong to F_{{{p}^{m}}}")]
    FieldMismatch { element: Vec<u64>, p: u64, m: usize },
    #[error("element code {code} out of range for a field of order {q}")]
    CodeOutOfRange { code: u64, q: u64 },
}

/// One element of F_{p^m}: a polynomial of degree `< m` over F_p, coefficient
/// list low-to-high, every coefficient in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub coeffs: Vec<u64>,
}

/// A concrete finite field F_{p^m} = F_p[X]/(modulus).
///
/// The modulus is the lexicographically smallest monic irreducible of degree
/// `m` (lower coefficients compared as a base-`p` integer), so construction
/// is deterministic across runs and machines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u64,
    m: usize,
    modulus: Vec<u64>,
    q: BigUint,
    q_word: u64,
}

impl FieldSpec {
    /// Characteristic.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Extension degree.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Monic irreducible modulus, coefficients low-to-high (length `m + 1`).
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Field order `p^m` as an arbitrary-precision integer.
    pub fn q(&self) -> &BigUint {
        &self.q
    }

    /// Field order as a machine word (construction caps guarantee the fit).
    pub fn order(&self) -> u64 {
        self.q_word
    }
}

/// Builds F_{p^m} with the default caps (see [`Caps::from_env`]).
pub fn build_field(p: u64, m: usize) -> Result<FieldSpec, FieldError> {
    build_field_with_caps(p, m, &Caps::from_env())
}

/// Builds F_{p^m}, verifying `p` prime, `m ≥ 1` and `p^m ≤ caps.field_order`.
///
/// The modulus is found by scanning monic degree-`m` polynomials in ascending
/// code order of their lower coefficients and keeping the first irreducible.
pub fn build_field_with_caps(p: u64, m: usize, caps: &Caps) -> Result<FieldSpec, FieldError> {
    if m == 0 {
        return Err(FieldError::DegreeZero);
    }
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    let q_big = BigUint::from(p).pow(m as u32);
    Caps::check("field_order", caps.field_order, &q_big)?;
    let q_word = u64::try_from(&q_big).expect("field order within cap fits u64");

    let modulus = smallest_irreducible(p, m, q_word);
    Ok(FieldSpec { p, m, modulus, q: q_big, q_word })
}

impl FieldSpec {
    fn guard(&self, a: &FieldElement) {
        if a.coeffs.len() != self.m || a.coeffs.iter().any(|&c| c >= self.p) {
            panic!(
                "{}",
                FieldError::FieldMismatch { element: a.coeffs.clone(), p: self.p, m: self.m }
            );
        }
    }

    /// Validates that `a` is a well-formed element of this field.
    pub fn check_element(&self, a: &FieldElement) -> Result<(), FieldError> {
        if a.coeffs.len() != self.m || a.coeffs.iter().any(|&c| c >= self.p) {
            return Err(FieldError::FieldMismatch {
                element: a.coeffs.clone(),
                p: self.p,
                m: self.m,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { coeffs: vec![0; self.m] }
    }

    pub fn one(&self) -> FieldElement {
        let mut coeffs = vec![0; self.m];
        coeffs[0] = 1 % self.p;
        FieldElement { coeffs }
    }

    /// Embeds a residue of F_p as a constant element.
    pub fn from_residue(&self, r: u64) -> FieldElement {
        let mut coeffs = vec![0; self.m];
        coeffs[0] = r % self.p;
        FieldElement { coeffs }
    }

    pub fn is_zero(&self, a: &FieldElement) -> bool {
        a.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.guard(a);
        self.guard(b);
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| {
                let s = x + y;
                if s >= self.p { s - self.p } else { s }
            })
            .collect();
        FieldElement { coeffs }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        self.guard(a);
        let coeffs = a.coeffs.iter().map(|&x| if x == 0 { 0 } else { self.p - x }).collect();
        FieldElement { coeffs }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.guard(a);
        self.guard(b);
        if self.m == 1 {
            return FieldElement { coeffs: vec![mulmod(a.coeffs[0], b.coeffs[0], self.p)] };
        }
        let prod = poly_mul(&a.coeffs, &b.coeffs, self.p);
        let rem = poly_rem(&prod, &self.modulus, self.p);
        FieldElement { coeffs: pad_to(rem, self.m) }
    }

    /// Multiplicative inverse; extended Euclid on polynomials (Fermat
    /// exponentiation in the prime-field case).
    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, FieldError> {
        self.guard(a);
        if self.is_zero(a) {
            return Err(FieldError::ZeroInverse);
        }
        if self.m == 1 {
            return Ok(FieldElement { coeffs: vec![powmod(a.coeffs[0], self.p - 2, self.p)] });
        }
        let inv = poly_inv_mod(&a.coeffs, &self.modulus, self.p);
        Ok(FieldElement { coeffs: pad_to(inv, self.m) })
    }

    /// `a^e` by square-and-multiply; `pow(a, 0) = 1` for every `a`.
    pub fn pow(&self, a: &FieldElement, e: u64) -> FieldElement {
        self.guard(a);
        let mut result = self.one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// Canonical integer code `Σ coeffs[j]·p^j` of an element.
    pub fn encode(&self, a: &FieldElement) -> u64 {
        self.guard(a);
        let mut code = 0u64;
        for &c in a.coeffs.iter().rev() {
            code = code * self.p + c;
        }
        code
    }

    /// Inverse of [`FieldSpec::encode`].
    pub fn decode(&self, code: u64) -> Result<FieldElement, FieldError> {
        if code >= self.q_word {
            return Err(FieldError::CodeOutOfRange { code, q: self.q_word });
        }
        let mut coeffs = vec![0; self.m];
        let mut rest = code;
        for c in coeffs.iter_mut() {
            *c = rest % self.p;
            rest /= self.p;
        }
        Ok(FieldElement { coeffs })
    }

    /// All `q` elements exactly once, in ascending code order (zero first).
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q_word).map(|code| self.decode(code).expect("codes below q are valid"))
    }

    /// `#{x ∈ F_q : x^d = u}`: one for `u = 0`; otherwise `gcd(d, q−1)` when
    /// `u` is a `gcd(d, q−1)`-th power residue and zero when it is not.
    pub fn power_residue_count(&self, d: u64, u: &FieldElement) -> u64 {
        assert!(d >= 1, "exponent must be at least 1");
        self.guard(u);
        if self.is_zero(u) {
            return 1;
        }
        let group = self.q_word - 1;
        if group == 0 {
            // F_2: the multiplicative group is trivial and u = 1.
            return 1;
        }
        let c = gcd(d, group);
        let probe = self.pow(u, group / c);
        if probe == self.one() {
            c
        } else {
            0
        }
    }
}

/// Precomputed code-space additive arithmetic used by the counting engines.
///
/// For small fields the add and negation maps are tabulated; otherwise they
/// are computed digitwise on demand. Either way results agree with
/// [`FieldSpec::add`] on decoded elements.
pub(crate) struct CodeArith {
    p: u64,
    m: usize,
    q: u64,
    add_table: Option<Vec<u32>>,
    neg_table: Vec<u32>,
}

const ADD_TABLE_MAX_ORDER: u64 = 1024;

impl CodeArith {
    pub(crate) fn new(field: &FieldSpec) -> CodeArith {
        let q = field.order();
        let p = field.p();
        let m = field.m();
        let neg_table = (0..q)
            .map(|code| {
                let e = field.decode(code).unwrap();
                field.encode(&field.neg(&e)) as u32
            })
            .collect();
        let add_table = if q <= ADD_TABLE_MAX_ORDER {
            let mut table = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..=a {
                    let sum = add_codes(a, b, p, m);
                    table[(a * q + b) as usize] = sum as u32;
                    table[(b * q + a) as usize] = sum as u32;
                }
            }
            Some(table)
        } else {
            None
        };
        CodeArith { p, m, q, add_table, neg_table }
    }

    #[inline]
    pub(crate) fn add(&self, a: u64, b: u64) -> u64 {
        match &self.add_table {
            Some(t) => t[(a * self.q + b) as usize] as u64,
            None => add_codes(a, b, self.p, self.m),
        }
    }

    #[inline]
    pub(crate) fn neg(&self, a: u64) -> u64 {
        self.neg_table[a as usize] as u64
    }

    #[inline]
    pub(crate) fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }
}

#[inline]
fn add_codes(a: u64, b: u64, p: u64, m: usize) -> u64 {
    if m == 1 {
        let s = a + b;
        return if s >= p { s - p } else { s };
    }
    let (mut a, mut b) = (a, b);
    let mut out = 0u64;
    let mut scale = 1u64;
    for _ in 0..m {
        let s = (a % p) + (b % p);
        let digit = if s >= p { s - p } else { s };
        out += digit * scale;
        scale *= p;
        a /= p;
        b /= p;
    }
    out
}

// ---------------------------------------------------------------------------
// Primality (deterministic below 2^64)
// ---------------------------------------------------------------------------

/// Deterministic Miller–Rabin; the fixed witness set decides primality for
/// every `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &sp in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == sp {
            return true;
        }
        if n % sp == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn powmod(mut base: u64, mut e: u64, n: u64) -> u64 {
    let mut result = 1 % n;
    base %= n;
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(result, base, n);
        }
        base = mulmod(base, base, n);
        e >>= 1;
    }
    result
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

// ---------------------------------------------------------------------------
// Polynomial arithmetic over F_p (modulus search and extension-field ops)
// ---------------------------------------------------------------------------

fn pad_to(mut v: Vec<u64>, len: usize) -> Vec<u64> {
    v.resize(len, 0);
    v
}

fn poly_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mulmod(x, y, p)) % p;
        }
    }
    poly_trim(&mut out);
    out
}

/// Remainder of `a` by the monic polynomial `f`, coefficients mod `p`.
fn poly_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut rem: Vec<u64> = a.to_vec();
    poly_trim(&mut rem);
    let deg_f = f.len() - 1;
    debug_assert_eq!(f[deg_f], 1, "modulus must be monic");
    while rem.len() > deg_f {
        let lead = *rem.last().unwrap();
        let shift = rem.len() - 1 - deg_f;
        if lead != 0 {
            for (j, &fc) in f.iter().enumerate() {
                let idx = shift + j;
                let sub = mulmod(lead, fc, p);
                rem[idx] = (rem[idx] + p - sub) % p;
            }
        }
        poly_trim(&mut rem);
        if rem.is_empty() {
            break;
        }
    }
    rem
}

/// Extended Euclid: inverse of `a` modulo the monic irreducible `f` over F_p.
/// `a` must be nonzero mod `f`.
fn poly_inv_mod(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    // Invariants: old_r = old_s·a (mod f), r = s·a (mod f).
    let mut old_r: Vec<u64> = f.to_vec();
    let mut r: Vec<u64> = poly_rem(a, f, p);
    let mut old_s: Vec<u64> = Vec::new();
    let mut s: Vec<u64> = vec![1];
    while !r.is_empty() {
        let (quot, rem) = poly_divmod(&old_r, &r, p);
        let qs = poly_mul(&quot, &s, p);
        let new_s = poly_sub(&old_s, &qs, p);
        old_r = std::mem::replace(&mut r, rem);
        old_s = std::mem::replace(&mut s, new_s);
    }
    // old_r is now gcd(a, f); irreducibility of f makes it a nonzero constant.
    debug_assert_eq!(old_r.len(), 1, "inverse of element sharing a factor with the modulus");
    let scale = powmod(old_r[0], p - 2, p);
    let mut inv: Vec<u64> = old_s.iter().map(|&c| mulmod(c, scale, p)).collect();
    inv = poly_rem(&inv, f, p);
    inv
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let len = a.len().max(b.len());
    let mut out = vec![0u64; len];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    poly_trim(&mut out);
    out
}

/// Division with remainder by an arbitrary nonzero divisor over F_p.
fn poly_divmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut rem: Vec<u64> = a.to_vec();
    poly_trim(&mut rem);
    let mut b = b.to_vec();
    poly_trim(&mut b);
    assert!(!b.is_empty(), "division by zero polynomial");
    let deg_b = b.len() - 1;
    let lead_inv = powmod(b[deg_b], p - 2, p);
    if rem.len() <= deg_b {
        return (Vec::new(), rem);
    }
    let mut quot = vec![0u64; rem.len() - deg_b];
    while rem.len() > deg_b {
        let lead = *rem.last().unwrap();
        let shift = rem.len() - 1 - deg_b;
        let coef = mulmod(lead, lead_inv, p);
        quot[shift] = coef;
        for (j, &bc) in b.iter().enumerate() {
            let sub = mulmod(coef, bc, p);
            rem[shift + j] = (rem[shift + j] + p - sub) % p;
        }
        poly_trim(&mut rem);
        if rem.is_empty() {
            break;
        }
    }
    poly_trim(&mut quot);
    (quot, rem)
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        let (_, r) = poly_divmod(&a, &b, p);
        a = std::mem::replace(&mut b, r);
    }
    a
}

/// `x^(p^k) mod f` via `k` successive Frobenius steps.
fn frobenius_power(k: usize, f: &[u64], p: u64) -> Vec<u64> {
    let mut g = vec![0u64, 1]; // X
    g = poly_rem(&g, f, p);
    for _ in 0..k {
        g = poly_pow_mod(&g, p, f, p);
    }
    g
}

fn poly_pow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut base = poly_rem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_rem(&poly_mul(&result, &base, p), f, p);
        }
        e >>= 1;
        if e > 0 {
            base = poly_rem(&poly_mul(&base, &base, p), f, p);
        }
    }
    result
}

fn eval_poly(f: &[u64], x: u64, p: u64) -> u64 {
    let mut acc = 0u64;
    for &c in f.iter().rev() {
        acc = (mulmod(acc, x, p) + c) % p;
    }
    acc
}

/// Irreducibility of a monic polynomial of degree `m ≥ 1` over F_p: rootless
/// check suffices through degree 3; the general case verifies
/// `x^(p^m) ≡ x (mod f)` together with `gcd(x^(p^(m/r)) − x, f) = 1` for each
/// prime `r | m`.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m == 1 {
        return true;
    }
    if f[0] == 0 {
        return false; // divisible by X
    }
    if m <= 3 {
        return (0..p).all(|x| eval_poly(f, x, p) != 0);
    }
    let x = vec![0u64, 1];
    let frob_m = frobenius_power(m, f, p);
    if poly_sub(&frob_m, &x, p) != Vec::<u64>::new() {
        return false;
    }
    for r in prime_factors(m as u64) {
        let g = frobenius_power(m / r as usize, f, p);
        let diff = poly_sub(&g, &x, p);
        let gcd = poly_gcd(&diff, f, p);
        if gcd.len() != 1 {
            return false;
        }
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut factors = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            factors.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}

/// First irreducible monic degree-`m` polynomial, lower coefficients scanned
/// in ascending base-`p` code order.
fn smallest_irreducible(p: u64, m: usize, q: u64) -> Vec<u64> {
    if m == 1 {
        return vec![0, 1]; // X: the quotient is F_p itself.
    }
    for code in 0..q {
        let mut coeffs = vec![0u64; m + 1];
        let mut rest = code;
        for c in coeffs.iter_mut().take(m) {
            *c = rest % p;
            rest /= p;
        }
        coeffs[m] = 1;
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64, m: usize) -> FieldSpec {
        build_field(p, m).unwrap()
    }

    /// Every prime power up to 49, the exhaustive-verification boundary.
    pub(crate) fn small_field_orders() -> Vec<(u64, usize)> {
        vec![
            (2, 1),
            (3, 1),
            (2, 2),
            (5, 1),
            (7, 1),
            (2, 3),
            (3, 2),
            (11, 1),
            (13, 1),
            (2, 4),
            (17, 1),
            (19, 1),
            (23, 1),
            (5, 2),
            (3, 3),
            (29, 1),
            (31, 1),
            (2, 5),
            (37, 1),
            (41, 1),
            (43, 1),
            (47, 1),
            (7, 2),
        ]
    }

    #[test]
    fn prime_field_modulus_is_x() {
        assert_eq!(field(5, 1).modulus(), &[0, 1]);
    }

    #[test]
    fn f9_modulus_is_x_squared_plus_one() {
        assert_eq!(field(3, 2).modulus(), &[1, 0, 1]);
    }

    #[test]
    fn f4_modulus_is_x_squared_plus_x_plus_one() {
        assert_eq!(field(2, 2).modulus(), &[1, 1, 1]);
    }

    #[test]
    fn composite_characteristic_rejected() {
        assert!(matches!(build_field(4, 1), Err(FieldError::NotPrime(4))));
        assert!(matches!(build_field(1, 1), Err(FieldError::NotPrime(1))));
    }

    #[test]
    fn degree_zero_rejected() {
        assert!(matches!(build_field(5, 0), Err(FieldError::DegreeZero)));
    }

    #[test]
    fn order_cap_enforced() {
        let caps = Caps { field_order: 100, ..Caps::default() };
        let err = build_field_with_caps(101, 1, &caps).unwrap_err();
        assert!(matches!(err, FieldError::Cap(_)));
        assert!(build_field_with_caps(2, 20, &Caps::default()).is_ok());
        assert!(build_field_with_caps(2, 21, &Caps::default()).is_err());
    }

    /// Independent irreducibility oracle: no monic divisor of degree in
    /// [1, m/2] (trial division over all candidate codes).
    fn irreducible_by_trial_division(f: &[u64], p: u64) -> bool {
        let m = f.len() - 1;
        for deg in 1..=m / 2 {
            let candidates = p.pow(deg as u32);
            for code in 0..candidates {
                let mut g = vec![0u64; deg + 1];
                let mut rest = code;
                for c in g.iter_mut().take(deg) {
                    *c = rest % p;
                    rest /= p;
                }
                g[deg] = 1;
                let (_, rem) = poly_divmod(f, &g, p);
                if rem.is_empty() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn modulus_is_minimal_irreducible_by_independent_oracle() {
        for (p, m) in [(2, 2), (2, 3), (2, 4), (2, 8), (3, 2), (3, 3), (3, 4), (5, 2), (7, 2)] {
            let f = field(p, m);
            let modulus = f.modulus();
            assert!(irreducible_by_trial_division(modulus, p), "modulus reducible for ({p},{m})");
            // Everything lexicographically below it must be reducible.
            let low_code = f
                .modulus()
                .iter()
                .take(m)
                .rev()
                .fold(0u64, |acc, &c| acc * p + c);
            for code in 0..low_code {
                let mut g = vec![0u64; m + 1];
                let mut rest = code;
                for c in g.iter_mut().take(m) {
                    *c = rest % p;
                    rest /= p;
                }
                g[m] = 1;
                assert!(
                    !irreducible_by_trial_division(&g, p),
                    "smaller irreducible exists for ({p},{m}): code {code}"
                );
            }
        }
    }

    #[test]
    fn inverse_of_two_in_f5() {
        let f = field(5, 1);
        let two = f.decode(2).unwrap();
        assert_eq!(f.encode(&f.inv(&two).unwrap()), 3);
    }

    #[test]
    fn x_squared_in_f9() {
        let f = field(3, 2);
        let x = FieldElement { coeffs: vec![0, 1] };
        assert_eq!(f.encode(&f.mul(&x, &x)), 2);
    }

    #[test]
    fn zero_inverse_rejected() {
        for (p, m) in [(5, 1), (3, 2)] {
            let f = field(p, m);
            assert!(matches!(f.inv(&f.zero()), Err(FieldError::ZeroInverse)));
        }
    }

    #[test]
    fn pow_zero_is_one() {
        let f = field(7, 1);
        for a in f.elements() {
            assert_eq!(f.pow(&a, 0), f.one());
        }
    }

    #[test]
    fn enumeration_order_and_size() {
        let f3: Vec<u64> = field(3, 1).elements().map(|e| e.coeffs[0]).collect();
        assert_eq!(f3, vec![0, 1, 2]);

        let f4 = field(2, 2);
        let elems: Vec<Vec<u64>> = f4.elements().map(|e| e.coeffs).collect();
        assert_eq!(elems, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);

        assert_eq!(field(3, 2).elements().count(), 9);
    }

    #[test]
    fn codec_round_trip_all_small_fields() {
        for (p, m) in small_field_orders() {
            let f = field(p, m);
            for code in 0..f.order() {
                let e = f.decode(code).unwrap();
                assert_eq!(f.encode(&e), code);
            }
            assert!(matches!(
                f.decode(f.order()),
                Err(FieldError::CodeOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn field_axioms_exhaustive_up_to_49() {
        for (p, m) in small_field_orders() {
            let f = field(p, m);
            let elems: Vec<FieldElement> = f.elements().collect();
            for a in &elems {
                assert_eq!(f.add(a, &f.zero()), *a);
                assert_eq!(f.mul(a, &f.one()), *a);
                assert_eq!(f.add(a, &f.neg(a)), f.zero());
                if !f.is_zero(a) {
                    let inv = f.inv(a).unwrap();
                    assert_eq!(f.mul(a, &inv), f.one(), "a·inv(a) ≠ 1 in F_{}^{}", p, m);
                }
                for b in &elems {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in &elems {
                        assert_eq!(f.add(&f.add(a, b), c), f.add(a, &f.add(b, c)));
                        assert_eq!(f.mul(&f.mul(a, b), c), f.mul(a, &f.mul(b, c)));
                        assert_eq!(
                            f.mul(a, &f.add(b, c)),
                            f.add(&f.mul(a, b), &f.mul(a, c)),
                            "distributivity fails in F_{}^{}",
                            p,
                            m
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cubes_of_unity_in_f7() {
        let f = field(7, 1);
        assert_eq!(f.power_residue_count(3, &f.one()), 3);
    }

    #[test]
    fn zero_has_one_root() {
        for (p, m) in [(5, 1), (3, 2), (2, 3)] {
            let f = field(p, m);
            for d in 1..=6 {
                assert_eq!(f.power_residue_count(d, &f.zero()), 1);
            }
        }
    }

    #[test]
    fn cubing_bijects_f5() {
        let f = field(5, 1);
        let two = f.decode(2).unwrap();
        assert_eq!(f.power_residue_count(3, &two), 1);
    }

    /// The stated independent oracle: enumerate x and count preimages.
    fn residue_count_by_enumeration(f: &FieldSpec, d: u64, u: &FieldElement) -> u64 {
        f.elements().filter(|x| f.pow(x, d) == *u).count() as u64
    }

    #[test]
    fn residue_counts_match_enumeration() {
        for (p, m) in [(2, 1), (3, 1), (5, 1), (7, 1), (2, 2), (3, 2), (2, 3), (13, 1)] {
            let f = field(p, m);
            for d in 1..=8 {
                for u in f.elements() {
                    assert_eq!(
                        f.power_residue_count(d, &u),
                        residue_count_by_enumeration(&f, d, &u),
                        "mismatch in F_{p}^{m} at d={d}, u={:?}",
                        u
                    );
                }
            }
        }
    }

    #[test]
    fn residue_counts_sum_to_q() {
        for (p, m) in small_field_orders() {
            let f = field(p, m);
            for d in 1..=8 {
                let total: u64 = f.elements().map(|u| f.power_residue_count(d, &u)).sum();
                assert_eq!(total, f.order());
            }
        }
    }

    #[test]
    fn residue_count_depends_only_on_gcd() {
        for (p, m) in [(5, 1), (7, 1), (3, 2), (13, 1)] {
            let f = field(p, m);
            for d in 1..=10 {
                let c = gcd(d, f.order() - 1);
                for u in f.elements().filter(|u| !f.is_zero(u)) {
                    assert_eq!(f.power_residue_count(d, &u), f.power_residue_count(c, &u));
                }
            }
        }
    }

    #[test]
    fn code_arith_agrees_with_element_ops() {
        for (p, m) in [(5, 1), (3, 2), (2, 4), (7, 2), (1021, 1)] {
            let f = field(p, m);
            let ca = CodeArith::new(&f);
            let q = f.order();
            let step = (q / 23).max(1);
            for a in (0..q).step_by(step as usize) {
                for b in (0..q).step_by(step as usize) {
                    let ea = f.decode(a).unwrap();
                    let eb = f.decode(b).unwrap();
                    assert_eq!(ca.add(a, b), f.encode(&f.add(&ea, &eb)));
                    assert_eq!(ca.sub(a, b), f.encode(&f.sub(&ea, &eb)));
                }
            }
        }
    }

    #[test]
    fn deterministic_miller_rabin_matches_known_classification() {
        let primes = [2u64, 3, 5, 7, 31, 149, 1021, 65537, 2_147_483_647, 2_305_843_009_213_693_951];
        for p in primes {
            assert!(is_prime(p), "{p} should be prime");
        }
        let composites = [0u64, 1, 4, 9, 15, 561, 1105, 6601, 25_326_001, 3_215_031_751];
        for c in composites {
            assert!(!is_prime(c), "{c} should be composite");
        }
    }

    #[test]
    fn q_is_cached_power() {
        let f = field(3, 4);
        assert_eq!(f.q(), &BigUint::from(81u32));
        assert_eq!(f.order(), 81);
    }
}
