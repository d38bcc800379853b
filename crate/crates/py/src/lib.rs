//! Python bindings for the diagcount toolkit.
//!
//! Field elements cross the boundary as integer codes (the base-p digit
//! encoding used everywhere else); exact counts come back as Python ints of
//! arbitrary size. Structured reports are plain dicts with the same shape as
//! the CLI's `--format structured` output, so counts inside reports are
//! decimal strings while `System.count` returns a true integer.

use num_bigint::BigUint;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use diagcount::bounds::{
    congruence_box_estimate, existence_general, main_estimate, mh_estimate, mh_existence,
    same_exponent_estimate, same_exponent_existence, verify, waring_gamma_bound, BoundsError,
    VerifyOptions,
};
use diagcount::caps::Caps;
use diagcount::cli::{bound_json, existence_json, nonzero_json, validation_json, verify_json};
use diagcount::count::{
    count_box, count_nonzero, count_solutions, CountError, Restriction, SolutionCount,
};
use diagcount::dickson::{check_functional_identity, dickson_coeffs};
use diagcount::gf::{build_field, FieldError, FieldSpec};
use diagcount::model::wire::{parse_system, serialize_system};
use diagcount::model::{
    generate_h_matrix, validate_system, BoundId, DiagonalSystem, ModelError, Regime, RhsFamily,
};

fn field_err(e: FieldError) -> PyErr {
    match e {
        FieldError::Cap(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn model_err(e: ModelError) -> PyErr {
    match e {
        ModelError::Cap(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn count_err(e: CountError) -> PyErr {
    match e {
        CountError::Cap(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn bounds_err(e: BoundsError) -> PyErr {
    match e {
        BoundsError::Cap(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Converts the CLI's structured JSON values into native Python objects.
fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<PyObject> {
    Ok(match value {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_py(py),
        serde_json::Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                u.into_py(py)
            } else if let Some(i) = n.as_i64() {
                i.into_py(py)
            } else {
                n.as_f64().expect("finite").into_py(py)
            }
        }
        serde_json::Value::String(s) => s.into_py(py),
        serde_json::Value::Array(items) => {
            let list = PyList::empty_bound(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py(py)
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new_bound(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_py(py)
        }
    })
}

fn parse_restriction(spec: &str) -> PyResult<Restriction> {
    match spec {
        "all" => Ok(Restriction::All),
        "nonzero" => Ok(Restriction::NonzeroCoords),
        other => Err(PyValueError::new_err(format!(
            "unknown restriction {other:?}: expected \"all\" or \"nonzero\""
        ))),
    }
}

/// A finite field F_q with q = p^m, operating on integer element codes.
#[pyclass(frozen, module = "diagcount_py")]
struct Field {
    spec: FieldSpec,
}

#[pymethods]
impl Field {
    #[new]
    #[pyo3(signature = (p, m = 1))]
    fn new(p: u64, m: usize) -> PyResult<Self> {
        Ok(Field { spec: build_field(p, m).map_err(field_err)? })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.spec.p()
    }

    #[getter]
    fn m(&self) -> usize {
        self.spec.m()
    }

    #[getter]
    fn order(&self) -> u64 {
        self.spec.order()
    }

    fn add(&self, a: u64, b: u64) -> PyResult<u64> {
        let (a, b) = (self.spec.decode(a).map_err(field_err)?, self.spec.decode(b).map_err(field_err)?);
        Ok(self.spec.encode(&self.spec.add(&a, &b)))
    }

    fn sub(&self, a: u64, b: u64) -> PyResult<u64> {
        let (a, b) = (self.spec.decode(a).map_err(field_err)?, self.spec.decode(b).map_err(field_err)?);
        Ok(self.spec.encode(&self.spec.sub(&a, &b)))
    }

    fn mul(&self, a: u64, b: u64) -> PyResult<u64> {
        let (a, b) = (self.spec.decode(a).map_err(field_err)?, self.spec.decode(b).map_err(field_err)?);
        Ok(self.spec.encode(&self.spec.mul(&a, &b)))
    }

    fn neg(&self, a: u64) -> PyResult<u64> {
        let a = self.spec.decode(a).map_err(field_err)?;
        Ok(self.spec.encode(&self.spec.neg(&a)))
    }

    fn inv(&self, a: u64) -> PyResult<u64> {
        let a = self.spec.decode(a).map_err(field_err)?;
        Ok(self.spec.encode(&self.spec.inv(&a).map_err(field_err)?))
    }

    #[pyo3(name = "pow")]
    fn pow_(&self, a: u64, e: u64) -> PyResult<u64> {
        let a = self.spec.decode(a).map_err(field_err)?;
        Ok(self.spec.encode(&self.spec.pow(&a, e)))
    }

    /// Number of d-th roots of the element with the given code.
    fn power_residue_count(&self, d: u64, u: u64) -> PyResult<u64> {
        let u = self.spec.decode(u).map_err(field_err)?;
        Ok(self.spec.power_residue_count(d, &u))
    }

    /// Dickson polynomial coefficients for degree d and parameter a,
    /// as codes in ascending degree order.
    fn dickson_coefficients(&self, d: u64, a: u64) -> PyResult<Vec<u64>> {
        let a = self.spec.decode(a).map_err(field_err)?;
        Ok(dickson_coeffs(&self.spec, d, &a).iter().map(|c| self.spec.encode(c)).collect())
    }

    /// Checks the composition identity for the Dickson polynomial of
    /// degree d at parameter a over every point of the field.
    fn dickson_identity_holds(&self, d: u64, a: u64) -> PyResult<bool> {
        let a = self.spec.decode(a).map_err(field_err)?;
        Ok(check_functional_identity(&self.spec, d, &a))
    }

    fn __repr__(&self) -> String {
        format!("Field(p={}, m={})", self.spec.p(), self.spec.m())
    }
}

/// A system of generalized diagonal equations, parsed from the same JSON
/// document format the CLI consumes.
#[pyclass(frozen, module = "diagcount_py")]
struct System {
    sys: DiagonalSystem,
}

impl System {
    fn count_with(&self, restriction: Restriction, engine: &str, caps: &Caps) -> PyResult<SolutionCount> {
        match engine {
            "auto" => count_solutions(&self.sys, restriction, caps).map_err(count_err),
            "brute" => {
                diagcount::count::count_bruteforce(&self.sys, restriction, caps).map_err(count_err)
            }
            "conv" => {
                diagcount::count::count_convolution(&self.sys, restriction, caps).map_err(count_err)
            }
            other => Err(PyValueError::new_err(format!(
                "unknown engine {other:?}: expected \"auto\", \"brute\", or \"conv\""
            ))),
        }
    }
}

#[pymethods]
impl System {
    /// Parses a system from its JSON document.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(System { sys: parse_system(text).map_err(model_err)? })
    }

    /// Serializes the system back to its JSON document.
    fn to_json(&self) -> String {
        serialize_system(&self.sys)
    }

    #[getter]
    fn q(&self) -> u64 {
        self.sys.field.order()
    }

    #[getter]
    fn p(&self) -> u64 {
        self.sys.field.p()
    }

    #[getter]
    fn m(&self) -> usize {
        self.sys.field.m()
    }

    #[getter]
    fn t(&self) -> usize {
        self.sys.num_vars()
    }

    #[getter]
    fn n(&self) -> usize {
        self.sys.num_eqs()
    }

    #[getter]
    fn exponents(&self) -> Vec<u64> {
        self.sys.exponents.clone()
    }

    /// Coefficient matrix as element codes, row major.
    #[getter]
    fn matrix(&self) -> Vec<Vec<u64>> {
        self.sys
            .matrix
            .iter()
            .map(|row| row.iter().map(|c| self.sys.field.encode(c)).collect())
            .collect()
    }

    /// Exact number of solutions. `restriction` is "all" or "nonzero";
    /// `engine` is "auto", "brute", or "conv".
    #[pyo3(signature = (restriction = "all", engine = "auto"))]
    fn count(&self, restriction: &str, engine: &str) -> PyResult<BigUint> {
        let caps = Caps::from_env();
        let restriction = parse_restriction(restriction)?;
        Ok(self.count_with(restriction, engine, &caps)?.count)
    }

    /// Exact number of solutions with every coordinate in [0, p − margin).
    /// Prime fields only.
    fn count_box(&self, margin: u64) -> PyResult<BigUint> {
        let caps = Caps::from_env();
        Ok(count_box(&self.sys, margin, &caps).map_err(count_err)?.count)
    }

    /// Validation report: regime, hypothesis (H), characteristic and shape
    /// gates, regime conditions, applicable bounds.
    fn validate(&self, py: Python<'_>) -> PyResult<PyObject> {
        let caps = Caps::from_env();
        let report = validate_system(&self.sys, &caps).map_err(model_err)?;
        json_to_py(py, &validation_json(&report))
    }

    /// Splits the count into all-nonzero solutions and the rest, with the
    /// per-subset zero profile and spread.
    fn count_nonzero(&self, py: Python<'_>) -> PyResult<PyObject> {
        let caps = Caps::from_env();
        let report = count_nonzero(&self.sys, &caps).map_err(count_err)?;
        json_to_py(py, &nonzero_json(&report))
    }

    /// Evaluates the regime's estimate against a count supplied by the
    /// caller (N, or N* for the Markoff–Hurwitz regime). With `margin`,
    /// evaluates the boxed congruence bound instead, reading the count as
    /// the box count N_m.
    #[pyo3(signature = (count, margin = None))]
    fn estimate(&self, py: Python<'_>, count: BigUint, margin: Option<u64>) -> PyResult<PyObject> {
        let caps = Caps::from_env();
        let report = if let Some(m) = margin {
            if self.sys.field.m() != 1 {
                return Err(PyValueError::new_err("boxed bound requires a prime field"));
            }
            congruence_box_estimate(
                self.sys.field.p(),
                self.sys.num_vars(),
                self.sys.num_eqs(),
                self.sys.d1(),
                m,
                &count,
            )
            .map_err(bounds_err)?
        } else {
            let validation = validate_system(&self.sys, &caps).map_err(model_err)?;
            match validation.regime {
                Regime::MarkoffHurwitz => mh_estimate(&self.sys, &count, &caps).map_err(bounds_err)?,
                Regime::SameExponent
                    if validation.applicable_bounds.contains(&BoundId::SameExponentZero) =>
                {
                    same_exponent_estimate(&self.sys, &count, &caps).map_err(bounds_err)?
                }
                _ => main_estimate(&self.sys, &count, &caps).map_err(bounds_err)?,
            }
        };
        json_to_py(py, &bound_json(&report))
    }

    /// The regime's existence verdict (general, same-exponent, or
    /// Markoff–Hurwitz), as a dict.
    fn existence(&self, py: Python<'_>) -> PyResult<PyObject> {
        let caps = Caps::from_env();
        let validation = validate_system(&self.sys, &caps).map_err(model_err)?;
        let (q, t, n, d1) =
            (self.sys.field.order(), self.sys.num_vars(), self.sys.num_eqs(), self.sys.d1());
        let value = match validation.regime {
            Regime::MarkoffHurwitz => {
                existence_json(&mh_existence(q, t, n, d1).map_err(bounds_err)?)
            }
            Regime::SameExponent => {
                let v = same_exponent_existence(q, d1, n, t);
                serde_json::json!({
                    "regime": "existence_same_exponent",
                    "q_condition": v.q_condition,
                    "threshold_holds": v.threshold_holds,
                    "witness_inequality": v.witness_inequality,
                    "minimal_t": v.minimal_t,
                })
            }
            _ => existence_json(&existence_general(q, t, n, d1).map_err(bounds_err)?),
        };
        json_to_py(py, &value)
    }

    /// Full verification: exact count (both engines when feasible), every
    /// applicable bound, existence verdicts, and implication cross-checks.
    #[pyo3(signature = (box_margins = vec![]))]
    fn verify(&self, py: Python<'_>, box_margins: Vec<u64>) -> PyResult<PyObject> {
        let caps = Caps::from_env();
        let options = VerifyOptions { box_margins };
        let report = verify(&self.sys, &options, &caps).map_err(bounds_err)?;
        json_to_py(py, &verify_json(&report))
    }

    fn __repr__(&self) -> String {
        let rhs = match &self.sys.rhs {
            RhsFamily::Constants(_) => "constants",
            RhsFamily::Polynomials { .. } => "polynomials",
            RhsFamily::MarkoffHurwitz { .. } => "markoff_hurwitz",
        };
        format!(
            "System(q={}, t={}, n={}, rhs={})",
            self.sys.field.order(),
            self.sys.num_vars(),
            self.sys.num_eqs(),
            rhs
        )
    }
}

/// Generates an n×t coefficient matrix satisfying hypothesis (H), as codes.
#[pyfunction]
#[pyo3(signature = (n, t, p, m = 1, seed = 0))]
fn generate_matrix(n: usize, t: usize, p: u64, m: usize, seed: u64) -> PyResult<Vec<Vec<u64>>> {
    let caps = Caps::from_env();
    let field = build_field(p, m).map_err(field_err)?;
    let matrix = generate_h_matrix(n, t, &field, seed, &caps).map_err(model_err)?;
    Ok(matrix.iter().map(|row| row.iter().map(|c| field.encode(c)).collect()).collect())
}

/// Least number of variables certified to represent every element of F_q as
/// a sum of d-th-power forms under the general existence threshold, with the
/// bracketing interval for the underlying threshold function.
#[pyfunction]
fn waring_gamma(py: Python<'_>, n: usize, q: u64, d1: u64) -> PyResult<PyObject> {
    let bound = waring_gamma_bound(n, q, d1).map_err(bounds_err)?;
    let value = serde_json::json!({
        "gamma_upper": bound.gamma_upper,
        "h_lo": format!("{:.6}", bound.h.lo_f64()),
        "h_hi": format!("{:.6}", bound.h.hi_f64()),
        "witness_inequality": bound.witness_inequality,
    });
    json_to_py(py, &value)
}

#[pyfunction(name = "parse_system")]
fn parse_system_py(text: &str) -> PyResult<System> {
    System::from_json(text)
}

#[pymodule]
fn diagcount_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Field>()?;
    m.add_class::<System>()?;
    m.add_function(wrap_pyfunction!(parse_system_py, m)?)?;
    m.add_function(wrap_pyfunction!(generate_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(waring_gamma, m)?)?;
    Ok(())
}
