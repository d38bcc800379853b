//! Sparse multivariate polynomials over a finite field.
//!
//! Right-hand sides are stored as sparse monomial lists (exponent tuple →
//! coefficient): degrees stay small but the number of variables varies per
//! system. Terms are kept canonical — sorted by exponent tuple, merged, with
//! zero coefficients dropped — so structural equality is semantic equality.

use crate::gf::{FieldElement, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    vars: usize,
    terms: Vec<(Vec<u64>, FieldElement)>,
}

impl SparsePoly {
    /// Builds a canonical polynomial from raw terms; every exponent tuple
    /// must have length `vars`.
    pub fn new(
        field: &FieldSpec,
        vars: usize,
        terms: Vec<(Vec<u64>, FieldElement)>,
    ) -> SparsePoly {
        for (exps, _) in &terms {
            assert_eq!(exps.len(), vars, "exponent tuple length must equal the variable count");
        }
        let mut terms = terms;
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Vec<u64>, FieldElement)> = Vec::with_capacity(terms.len());
        for (exps, coeff) in terms {
            match merged.last_mut() {
                Some((last_exps, last_coeff)) if *last_exps == exps => {
                    *last_coeff = field.add(last_coeff, &coeff);
                }
                _ => merged.push((exps, coeff)),
            }
        }
        merged.retain(|(_, c)| !field.is_zero(c));
        SparsePoly { vars, terms: merged }
    }

    pub fn zero(vars: usize) -> SparsePoly {
        SparsePoly { vars, terms: Vec::new() }
    }

    pub fn constant(field: &FieldSpec, vars: usize, value: FieldElement) -> SparsePoly {
        SparsePoly::new(field, vars, vec![(vec![0; vars], value)])
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> &[(Vec<u64>, FieldElement)] {
        &self.terms
    }

    /// Largest total degree among the monomials (0 for the zero polynomial).
    pub fn total_degree(&self) -> u64 {
        self.terms.iter().map(|(exps, _)| exps.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.total_degree() == 0
    }

    /// The coefficient of the constant monomial.
    pub fn constant_term(&self, field: &FieldSpec) -> FieldElement {
        self.terms
            .iter()
            .find(|(exps, _)| exps.iter().all(|&e| e == 0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(|| field.zero())
    }

    pub fn eval(&self, field: &FieldSpec, point: &[FieldElement]) -> FieldElement {
        assert_eq!(point.len(), self.vars, "evaluation point has wrong arity");
        let mut acc = field.zero();
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (x, &e) in point.iter().zip(exps) {
                if e > 0 {
                    term = field.mul(&term, &field.pow(x, e));
                }
            }
            acc = field.add(&acc, &term);
        }
        acc
    }

    pub fn add(&self, field: &FieldSpec, other: &SparsePoly) -> SparsePoly {
        assert_eq!(self.vars, other.vars);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        SparsePoly::new(field, self.vars, terms)
    }

    pub fn scale(&self, field: &FieldSpec, c: &FieldElement) -> SparsePoly {
        let terms =
            self.terms.iter().map(|(e, v)| (e.clone(), field.mul(v, c))).collect();
        SparsePoly::new(field, self.vars, terms)
    }

    pub fn add_constant(&self, field: &FieldSpec, c: &FieldElement) -> SparsePoly {
        self.add(field, &SparsePoly::constant(field, self.vars, c.clone()))
    }

    /// Substitutes 0 for variable `var` and removes it from every exponent
    /// tuple; monomials containing the variable vanish.
    pub fn substitute_zero(&self, field: &FieldSpec, var: usize) -> SparsePoly {
        assert!(var < self.vars);
        let terms = self
            .terms
            .iter()
            .filter(|(exps, _)| exps[var] == 0)
            .map(|(exps, coeff)| {
                let mut reduced = exps.clone();
                reduced.remove(var);
                (reduced, coeff.clone())
            })
            .collect();
        SparsePoly::new(field, self.vars - 1, terms)
    }
}
