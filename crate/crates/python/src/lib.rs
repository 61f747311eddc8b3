//! Python bindings for the scatterforge toolkit.
//!
//! The module mirrors the command-line surface: `construct`, `spectrum`,
//! `code_report`, `scan` and `equivalence` run the same pipelines as the
//! binary and hand the certificate back as a plain dict, so results compare
//! byte-for-byte (minus timing) with certificates written by the CLI. Two
//! classes give direct access underneath the certificates: `Tower` exposes
//! field arithmetic on packed element indices, `Family` builds one subspace
//! and answers geometric questions about it.
//!
//! Elements of F_{q^m} travel across the boundary as integer indices in
//! `0..q^m`, the same packed little-endian convention the core crate uses;
//! `Tower.coeffs` and `Tower.from_coeffs` translate between an index and its
//! digit vector over F_q.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList};
use scatterforge::code;
use scatterforge::construction::{self, ConstructionParams};
use scatterforge::error::Error as CoreError;
use scatterforge::geometry;
use scatterforge::linearized;
use scatterforge::report;
use scatterforge::{Level, Tower as CoreTower, DEFAULT_BUDGET};
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::PathBuf;

pyo3::create_exception!(
    scatterforge_py,
    BudgetError,
    PyRuntimeError,
    "an enumeration would exceed the operation budget"
);

fn err_to_py(e: CoreError) -> PyErr {
    match &e {
        CoreError::InvalidParams(_)
        | CoreError::NotIrreducible(_)
        | CoreError::LevelMismatch { .. } => PyValueError::new_err(e.to_string()),
        CoreError::BudgetExceeded { .. } => BudgetError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Recursive JSON-to-Python conversion; certificates stay dicts all the way
/// down, with counts as ints (u64 values above i64::MAX included).
fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any().unbind(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any().unbind()
            } else {
                n.as_f64()
                    .unwrap_or(f64::NAN)
                    .into_pyobject(py)?
                    .into_any()
                    .unbind()
            }
        }
        Value::String(s) => s.as_str().into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn to_py_dict<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// The field chain F_p < F_q < F_{q^m}. Elements of F_{q^m} are integer
/// indices in `0..qm`; 0 and 1 are the additive and multiplicative
/// identities, and an index below q denotes the corresponding F_q element.
#[pyclass(frozen)]
struct Tower {
    inner: CoreTower,
}

impl Tower {
    fn check_index(&self, label: &str, a: u32) -> PyResult<()> {
        if a >= self.inner.qm() {
            return Err(PyValueError::new_err(format!(
                "{label} = {a} is out of range for a field of {} elements",
                self.inner.qm()
            )));
        }
        Ok(())
    }

    fn elem_qm(&self, label: &str, a: u32) -> PyResult<scatterforge::FieldElement> {
        self.check_index(label, a)?;
        self.inner.elem(Level::Qm, a).map_err(err_to_py)
    }
}

#[pymethods]
impl Tower {
    #[new]
    fn new(p: u32, e: u32, m: u32) -> PyResult<Self> {
        let inner = scatterforge::build_tower(p, e, m).map_err(err_to_py)?;
        Ok(Tower { inner })
    }

    #[getter]
    fn p(&self) -> u32 {
        self.inner.p()
    }

    #[getter]
    fn e(&self) -> u32 {
        self.inner.e()
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m()
    }

    /// Size of the middle field F_q.
    #[getter]
    fn q(&self) -> u32 {
        self.inner.q()
    }

    /// Size of the top field F_{q^m}.
    #[getter]
    fn qm(&self) -> u32 {
        self.inner.qm()
    }

    /// Coefficients of the F_q-defining polynomial over F_p, little-endian,
    /// monic, length e + 1.
    fn poly_q(&self) -> Vec<u32> {
        self.inner.poly_q().to_vec()
    }

    /// Coefficients of the F_{q^m}-defining polynomial over F_q.
    fn poly_qm(&self) -> Vec<u32> {
        self.inner.poly_qm().to_vec()
    }

    fn add(&self, a: u32, b: u32) -> PyResult<u32> {
        self.check_index("a", a)?;
        self.check_index("b", b)?;
        Ok(self.inner.qm_add(a, b))
    }

    fn sub(&self, a: u32, b: u32) -> PyResult<u32> {
        self.check_index("a", a)?;
        self.check_index("b", b)?;
        Ok(self.inner.qm_sub(a, b))
    }

    fn mul(&self, a: u32, b: u32) -> PyResult<u32> {
        self.check_index("a", a)?;
        self.check_index("b", b)?;
        Ok(self.inner.qm_mul(a, b))
    }

    fn neg(&self, a: u32) -> PyResult<u32> {
        self.check_index("a", a)?;
        Ok(self.inner.qm_neg(a))
    }

    /// Multiplicative inverse, or None for 0.
    fn inv(&self, a: u32) -> PyResult<Option<u32>> {
        self.check_index("a", a)?;
        Ok(self.inner.qm_inv(a))
    }

    fn pow(&self, a: u32, k: u64) -> PyResult<u32> {
        self.check_index("a", a)?;
        Ok(self.inner.qm_pow(a, k))
    }

    /// x^(q^s), the s-fold Frobenius over F_q.
    #[pyo3(signature = (x, s = 1))]
    fn frobenius(&self, x: u32, s: u32) -> PyResult<u32> {
        self.check_index("x", x)?;
        Ok(self.inner.qm_frob(x, s))
    }

    /// Norm from F_{q^m} down to F_q, returned as an F_q index.
    fn norm(&self, x: u32) -> PyResult<u32> {
        let e = self.elem_qm("x", x)?;
        Ok(self.inner.norm(e).map_err(err_to_py)?.index)
    }

    /// Trace from F_{q^m} down to F_q, returned as an F_q index.
    fn trace(&self, x: u32) -> PyResult<u32> {
        let e = self.elem_qm("x", x)?;
        Ok(self.inner.trace(e).map_err(err_to_py)?.index)
    }

    /// Digits of an F_{q^m} index over F_q, little-endian, length m.
    fn coeffs(&self, x: u32) -> PyResult<Vec<u32>> {
        let e = self.elem_qm("x", x)?;
        self.inner.coeffs(e).map_err(err_to_py)
    }

    /// Inverse of `coeffs`: pack a digit vector back into an index.
    fn from_coeffs(&self, coeffs: Vec<u32>) -> PyResult<u32> {
        Ok(self
            .inner
            .from_coeffs(Level::Qm, &coeffs)
            .map_err(err_to_py)?
            .index)
    }

    /// G_0..G_count of the twisted recurrence G_k = -G_{k-1}^sigma - u * G_{k-2}^(sigma^2)
    /// with sigma = q^s, as F_{q^m} indices.
    fn g_sequence(&self, s: u32, u: u32, count: usize) -> PyResult<Vec<u32>> {
        self.check_index("u", u)?;
        linearized::g_sequence(&self.inner, s, u, count).map_err(err_to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Tower(p={}, e={}, m={})",
            self.inner.p(),
            self.inner.e(),
            self.inner.m()
        )
    }
}

/// One member of the subspace family: the shift-s construction, an
/// (m+2)-dimensional F_q-subspace of F_{q^m}^3. Built eagerly; every
/// method afterwards is a pure question about it.
#[pyclass(frozen)]
struct Family {
    params: ConstructionParams,
    tower: CoreTower,
    subspace: geometry::FqSubspace,
}

impl Family {
    fn budget_or_default(budget: Option<u64>) -> u64 {
        budget.unwrap_or(DEFAULT_BUDGET)
    }
}

#[pymethods]
impl Family {
    #[new]
    fn new(p: u32, e: u32, m: u32, s: u32) -> PyResult<Self> {
        let params = ConstructionParams::new(p, e, m, s).map_err(err_to_py)?;
        let tower = params.tower().map_err(err_to_py)?;
        let subspace = construction::build_u_sigma(&tower, &params).map_err(err_to_py)?;
        Ok(Family {
            params,
            tower,
            subspace,
        })
    }

    #[getter]
    fn p(&self) -> u32 {
        self.params.p
    }

    #[getter]
    fn e(&self) -> u32 {
        self.params.e
    }

    #[getter]
    fn m(&self) -> u32 {
        self.params.m
    }

    #[getter]
    fn s(&self) -> u32 {
        self.params.s
    }

    #[getter]
    fn q(&self) -> u64 {
        self.params.q()
    }

    /// True for the smallest fully enumerable member, q = 2, m = 5.
    #[getter]
    fn is_headline(&self) -> bool {
        self.params.is_headline()
    }

    /// F_q-dimension, always m + 2.
    fn dim(&self) -> usize {
        self.subspace.dim()
    }

    /// Echelonized basis rows, each a length-3 vector of F_{q^m} indices.
    fn basis(&self) -> Vec<Vec<u32>> {
        self.subspace.basis.clone()
    }

    fn contains(&self, v: Vec<u32>) -> PyResult<bool> {
        self.subspace
            .contains_vector(&self.tower, &v)
            .map_err(err_to_py)
    }

    /// Hex of the canonical basis encoding; equal strings mean equal
    /// subspaces regardless of the presented basis.
    fn canonical_hex(&self) -> String {
        self.subspace
            .canonical_bytes()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Exhaustive scatteredness check: no projective point of weight 2 or
    /// more. Raises BudgetError if the enumeration exceeds the budget.
    #[pyo3(signature = (budget = None))]
    fn scattered(&self, budget: Option<u64>) -> PyResult<bool> {
        construction::scatteredness_bruteforce(
            &self.tower,
            &self.subspace,
            Self::budget_or_default(budget),
        )
        .map(|v| v.holds)
        .map_err(err_to_py)
    }

    /// Full criteria evaluation as a dict: conditions i-iii, the G-sequence
    /// and factorial criteria, the m = 5 / m = 7 closed forms, and (when
    /// requested) the brute-force verdict.
    #[pyo3(signature = (with_bruteforce = true, budget = None))]
    fn criteria(
        &self,
        py: Python<'_>,
        with_bruteforce: bool,
        budget: Option<u64>,
    ) -> PyResult<Py<PyAny>> {
        let rep = construction::check_main_theorem(
            &self.tower,
            &self.params,
            with_bruteforce,
            Self::budget_or_default(budget),
        )
        .map_err(err_to_py)?;
        to_py_dict(py, &rep)
    }

    /// Points of the projective linear set as (point_rank, weight) pairs.
    fn linear_set(&self) -> PyResult<Vec<(u64, u32)>> {
        geometry::linear_set_points(&self.tower, &self.subspace).map_err(err_to_py)
    }

    /// Weight distribution {weight: count} over the F_{q^m}-subspaces of the
    /// given vector-space dimension: 1 for points, 2 for lines of PG(2, q^m).
    #[pyo3(signature = (subspace_dim = 2, budget = None))]
    fn weight_spectrum(
        &self,
        subspace_dim: u32,
        budget: Option<u64>,
    ) -> PyResult<BTreeMap<u32, u64>> {
        geometry::weight_spectrum(
            &self.tower,
            &self.subspace,
            subspace_dim,
            Self::budget_or_default(budget),
        )
        .map(|s| s.counts)
        .map_err(err_to_py)
    }

    /// Canonical generator matrix of the associated [m+2, 3] rank-metric
    /// code, rows over F_{q^m} indices.
    fn generator_matrix(&self) -> PyResult<Vec<Vec<u32>>> {
        let c = code::psi(&self.tower, &self.subspace).map_err(err_to_py)?;
        c.canonical_rows(&self.tower).map_err(err_to_py)
    }

    /// Same matrix as CSV, one row per line, entries as indices.
    fn generator_csv(&self) -> PyResult<String> {
        let c = code::psi(&self.tower, &self.subspace).map_err(err_to_py)?;
        c.generator_csv(&self.tower).map_err(err_to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Family(p={}, e={}, m={}, s={})",
            self.params.p, self.params.e, self.params.m, self.params.s
        )
    }
}

fn params_of(p: u32, e: u32, m: u32, s: u32) -> PyResult<ConstructionParams> {
    ConstructionParams::new(p, e, m, s).map_err(err_to_py)
}

/// Build the family, evaluate all criteria and return the certificate dict.
/// Matches `scatterforge construct` output.
#[pyfunction]
#[pyo3(signature = (p, e, m, s, budget = None))]
fn construct(
    py: Python<'_>,
    p: u32,
    e: u32,
    m: u32,
    s: u32,
    budget: Option<u64>,
) -> PyResult<Py<PyAny>> {
    let params = params_of(p, e, m, s)?;
    let cert = report::run_construct(&params, budget.unwrap_or(DEFAULT_BUDGET))
        .map_err(err_to_py)?;
    to_py_dict(py, &cert)
}

/// Line weight spectrum plus the closed-form cross-check. Returns
/// (certificate dict, csv text); matches `scatterforge spectrum`.
#[pyfunction]
#[pyo3(signature = (p, e, m, s, budget = None))]
fn spectrum(
    py: Python<'_>,
    p: u32,
    e: u32,
    m: u32,
    s: u32,
    budget: Option<u64>,
) -> PyResult<(Py<PyAny>, String)> {
    let params = params_of(p, e, m, s)?;
    let (cert, csv) =
        report::run_spectrum(&params, budget.unwrap_or(DEFAULT_BUDGET)).map_err(err_to_py)?;
    Ok((to_py_dict(py, &cert)?, csv))
}

/// Full report on the derived rank-metric code: distribution, minimality,
/// dual, saturation. Returns (certificate dict, generator csv); matches
/// `scatterforge code-report`.
#[pyfunction]
#[pyo3(signature = (p, e, m, s, budget = None))]
fn code_report(
    py: Python<'_>,
    p: u32,
    e: u32,
    m: u32,
    s: u32,
    budget: Option<u64>,
) -> PyResult<(Py<PyAny>, String)> {
    let params = params_of(p, e, m, s)?;
    let (cert, csv) =
        report::run_code_report(&params, budget.unwrap_or(DEFAULT_BUDGET)).map_err(err_to_py)?;
    Ok((to_py_dict(py, &cert)?, csv))
}

/// Sweep a parameter grid, e.g. "p=2,3;e=1;m=5;s=1,2". Matches
/// `scatterforge scan`.
#[pyfunction]
#[pyo3(signature = (grid, budget = None))]
fn scan(py: Python<'_>, grid: &str, budget: Option<u64>) -> PyResult<Py<PyAny>> {
    let cert = report::run_scan(grid, budget.unwrap_or(DEFAULT_BUDGET)).map_err(err_to_py)?;
    to_py_dict(py, &cert)
}

/// Decide equivalence of the shift-s and shift-target members and, when they
/// are equivalent, verify an explicit witness map. Matches
/// `scatterforge equivalence`.
#[pyfunction]
#[pyo3(signature = (p, e, m, s, target, budget = None))]
fn equivalence(
    py: Python<'_>,
    p: u32,
    e: u32,
    m: u32,
    s: u32,
    target: u32,
    budget: Option<u64>,
) -> PyResult<Py<PyAny>> {
    let params = params_of(p, e, m, s)?;
    let cert = report::run_equivalence(&params, target, budget.unwrap_or(DEFAULT_BUDGET))
        .map_err(err_to_py)?;
    to_py_dict(py, &cert)
}

/// Re-run a certificate written by the CLI or these bindings and demand
/// byte-identical results. Raises RuntimeError on drift.
#[pyfunction]
fn replay(path: PathBuf) -> PyResult<()> {
    report::replay(&path, None).map_err(err_to_py)
}

#[pymodule]
fn scatterforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Tower>()?;
    m.add_class::<Family>()?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(code_report, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add("BudgetError", m.py().get_type::<BudgetError>())?;
    m.add("DEFAULT_BUDGET", DEFAULT_BUDGET)?;
    m.add("SCHEMA_VERSION", report::SCHEMA_VERSION)?;
    Ok(())
}
