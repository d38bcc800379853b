//! JSON wire format for [`DiagonalSystem`].
//!
//! Field elements travel as integer codes (see [`FieldSpec::encode`]); the
//! modulus polynomial is never serialized — it is reconstructed canonically
//! from `p` and `m`, so two parties agree on the representation by
//! construction.
//!
//! ```json
//! {
//!   "field": {"p": 5, "m": 1},
//!   "t": 3, "n": 1,
//!   "exponents": [4, 3, 2],
//!   "matrix": [[1, 2, 3]],
//!   "lhs": {"kind": "powers"},
//!   "rhs": {"kind": "constants", "values": [1]}
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::gf::{build_field_with_caps, FieldElement, FieldSpec};
use crate::model::{DiagonalSystem, LhsFamily, ModelError, RhsFamily, SparsePoly};

#[derive(Debug, Serialize, Deserialize)]
struct FieldDoc {
    p: u64,
    m: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermDoc {
    exps: Vec<u64>,
    coeff: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LhsDoc {
    Powers,
    Univariate { polys: Vec<Vec<u64>> },
    Dickson { params: Vec<u64> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RhsDoc {
    Constants { values: Vec<u64> },
    Polynomials { k: usize, polys: Vec<Vec<TermDoc>> },
    MarkoffHurwitz {
        constants: Vec<u64>,
        mono_coeffs: Vec<u64>,
        mono_exps: Vec<Vec<u64>>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct SystemDoc {
    field: FieldDoc,
    t: usize,
    n: usize,
    exponents: Vec<u64>,
    matrix: Vec<Vec<u64>>,
    lhs: LhsDoc,
    rhs: RhsDoc,
}

fn map_json_error(err: serde_json::Error) -> ModelError {
    if err.is_syntax() || err.is_eof() {
        return ModelError::Syntax {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        };
    }
    let message = err.to_string();
    if let Some(rest) = message.strip_prefix("unknown variant `") {
        if let Some(end) = rest.find('`') {
            return ModelError::UnknownVariantTag(rest[..end].to_string());
        }
    }
    ModelError::ShapeMismatch(message)
}

fn decode_all(field: &FieldSpec, codes: &[u64]) -> Result<Vec<FieldElement>, ModelError> {
    codes.iter().map(|&c| field.decode(c).map_err(map_field_code)).collect()
}

fn map_field_code(err: crate::gf::FieldError) -> ModelError {
    match err {
        crate::gf::FieldError::CodeOutOfRange { code, q } => ModelError::CodeOutOfRange { code, q },
        other => ModelError::Field(other),
    }
}

/// Parses a JSON document into a structurally checked system.
pub fn parse_system(input: &str) -> Result<DiagonalSystem, ModelError> {
    parse_system_with_caps(input, &Caps::from_env())
}

pub fn parse_system_with_caps(input: &str, caps: &Caps) -> Result<DiagonalSystem, ModelError> {
    let doc: SystemDoc = serde_json::from_str(input).map_err(map_json_error)?;
    let field = build_field_with_caps(doc.field.p, doc.field.m, caps)?;

    if doc.exponents.len() != doc.t {
        return Err(ModelError::ShapeMismatch(format!(
            "exponents has {} entries but t = {}",
            doc.exponents.len(),
            doc.t
        )));
    }
    if doc.matrix.len() != doc.n {
        return Err(ModelError::ShapeMismatch(format!(
            "matrix has {} rows but n = {}",
            doc.matrix.len(),
            doc.n
        )));
    }

    let matrix = doc
        .matrix
        .iter()
        .map(|row| decode_all(&field, row))
        .collect::<Result<Vec<_>, _>>()?;

    let lhs = match doc.lhs {
        LhsDoc::Powers => LhsFamily::PurePowers,
        LhsDoc::Univariate { polys } => LhsFamily::UnivariateFamily(
            polys.iter().map(|h| decode_all(&field, h)).collect::<Result<Vec<_>, _>>()?,
        ),
        LhsDoc::Dickson { params } => LhsFamily::Dickson(decode_all(&field, &params)?),
    };

    let rhs = match doc.rhs {
        RhsDoc::Constants { values } => RhsFamily::Constants(decode_all(&field, &values)?),
        RhsDoc::Polynomials { k, polys } => {
            let polys = polys
                .into_iter()
                .map(|terms| {
                    let terms = terms
                        .into_iter()
                        .map(|term| {
                            if term.exps.len() != k {
                                return Err(ModelError::ShapeMismatch(format!(
                                    "monomial has {} exponents but k = {}",
                                    term.exps.len(),
                                    k
                                )));
                            }
                            Ok((term.exps, field.decode(term.coeff).map_err(map_field_code)?))
                        })
                        .collect::<Result<Vec<_>, ModelError>>()?;
                    Ok(SparsePoly::new(&field, k, terms))
                })
                .collect::<Result<Vec<_>, ModelError>>()?;
            RhsFamily::Polynomials { k, polys }
        }
        RhsDoc::MarkoffHurwitz { constants, mono_coeffs, mono_exps } => RhsFamily::MarkoffHurwitz {
            constants: decode_all(&field, &constants)?,
            mono_coeffs: decode_all(&field, &mono_coeffs)?,
            mono_exps,
        },
    };

    DiagonalSystem::new(field, doc.exponents, matrix, lhs, rhs)
}

/// Serializes a system to its canonical JSON document (single line).
pub fn serialize_system(sys: &DiagonalSystem) -> String {
    let field = &sys.field;
    let codes = |row: &[FieldElement]| -> Vec<u64> { row.iter().map(|e| field.encode(e)).collect() };

    let lhs = match &sys.lhs {
        LhsFamily::PurePowers => LhsDoc::Powers,
        LhsFamily::UnivariateFamily(polys) => {
            LhsDoc::Univariate { polys: polys.iter().map(|h| codes(h)).collect() }
        }
        LhsFamily::Dickson(params) => LhsDoc::Dickson { params: codes(params) },
    };
    let rhs = match &sys.rhs {
        RhsFamily::Constants(values) => RhsDoc::Constants { values: codes(values) },
        RhsFamily::Polynomials { k, polys } => RhsDoc::Polynomials {
            k: *k,
            polys: polys
                .iter()
                .map(|g| {
                    g.terms()
                        .iter()
                        .map(|(exps, c)| TermDoc { exps: exps.clone(), coeff: field.encode(c) })
                        .collect()
                })
                .collect(),
        },
        RhsFamily::MarkoffHurwitz { constants, mono_coeffs, mono_exps } => RhsDoc::MarkoffHurwitz {
            constants: codes(constants),
            mono_coeffs: codes(mono_coeffs),
            mono_exps: mono_exps.clone(),
        },
    };
    let doc = SystemDoc {
        field: FieldDoc { p: field.p(), m: field.m() },
        t: sys.num_vars(),
        n: sys.num_eqs(),
        exponents: sys.exponents.clone(),
        matrix: sys.matrix.iter().map(|r| codes(r)).collect(),
        lhs,
        rhs,
    };
    serde_json::to_string(&doc).expect("document serialization cannot fail")
}
