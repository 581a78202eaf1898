//! Python module `threeap`: sets, counting, constructions, extremal search,
//! the bounds ledger and the verification suites.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use threeap_core::analysis;
use threeap_core::bounds::{self, Target};
use threeap_core::construct::{self, Family, FamilyTag, IntersectConfig};
use threeap_core::count;
use threeap_core::interchange::SetDocument;
use threeap_core::rational::{format_rational, parse_rational};
use threeap_core::search::{self, ExtremalResult, Side, DEFAULT_BUDGET_NODES};
use threeap_core::suites::{self, SuiteConfig};
use threeap_core::{AnySet, Error};

create_exception!(threeap, BudgetExceededError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BudgetExceeded { .. } => BudgetExceededError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_side(side: &str) -> PyResult<Side> {
    match side {
        "max" => Ok(Side::Max),
        "min" => Ok(Side::Min),
        _ => Err(PyValueError::new_err(format!("side must be 'max' or 'min', got {side:?}"))),
    }
}

fn parse_target(target: &str) -> PyResult<Target> {
    match target {
        "m3" => Ok(Target::MinCount),
        "M3" => Ok(Target::MaxCount),
        _ => Err(PyValueError::new_err(format!("target must be 'm3' or 'M3', got {target:?}"))),
    }
}

/// A subset of Z/NZ.
#[pyclass(name = "ResidueSet", module = "threeap", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PyResidueSet {
    inner: threeap_core::ResidueSet,
}

#[pymethods]
impl PyResidueSet {
    #[new]
    fn new(modulus: u64, elements: Vec<u64>) -> PyResult<Self> {
        threeap_core::ResidueSet::new(modulus, elements)
            .map(|inner| PyResidueSet { inner })
            .map_err(to_py)
    }

    /// Parses `{"modulus": N, "elements": [...]}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        match SetDocument::parse(text).map_err(to_py)? {
            AnySet::Residues(inner) => Ok(PyResidueSet { inner }),
            AnySet::Integers(_) => Err(PyValueError::new_err("document has no modulus")),
        }
    }

    fn to_json(&self) -> String {
        threeap_core::interchange::set_to_json(&AnySet::Residues(self.inner.clone()))
    }

    #[getter]
    fn modulus(&self) -> u64 {
        self.inner.modulus()
    }

    #[getter]
    fn elements(&self) -> Vec<u64> {
        self.inner.to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, x: u64) -> bool {
        self.inner.contains(x % self.inner.modulus())
    }

    fn __repr__(&self) -> String {
        format!("ResidueSet({}, {:?})", self.inner.modulus(), self.inner.to_vec())
    }

    fn density(&self) -> f64 {
        self.inner.density()
    }

    fn t3(&self) -> u64 {
        count::t3(&self.inner)
    }

    fn dilate(&self, factor: i64) -> Self {
        PyResidueSet { inner: self.inner.dilate(factor) }
    }

    fn translate(&self, shift: i64) -> Self {
        PyResidueSet { inner: self.inner.translate(shift) }
    }

    fn complement(&self) -> Self {
        PyResidueSet { inner: self.inner.complement() }
    }

    fn intersection(&self, other: &PyResidueSet) -> PyResult<Self> {
        self.inner
            .intersection(&other.inner)
            .map(|inner| PyResidueSet { inner })
            .map_err(to_py)
    }

    fn union(&self, other: &PyResidueSet) -> PyResult<Self> {
        self.inner.union(&other.inner).map(|inner| PyResidueSet { inner }).map_err(to_py)
    }
}

/// A finite set of integers.
#[pyclass(name = "IntegerSet", module = "threeap", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PyIntegerSet {
    inner: threeap_core::IntegerSet,
}

#[pymethods]
impl PyIntegerSet {
    #[new]
    fn new(elements: Vec<i64>) -> PyResult<Self> {
        threeap_core::IntegerSet::new(elements)
            .map(|inner| PyIntegerSet { inner })
            .map_err(to_py)
    }

    #[getter]
    fn elements(&self) -> Vec<i64> {
        self.inner.elements().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("IntegerSet({:?})", self.inner.elements())
    }

    fn t3(&self) -> u64 {
        count::t3_integers(&self.inner).t3
    }

    /// Reduces `x ↦ (x + shift) mod N`.
    #[pyo3(signature = (modulus, shift = 0))]
    fn reduce_mod(&self, modulus: u64, shift: i64) -> PyResult<PyResidueSet> {
        self.inner
            .reduce_mod(modulus, shift)
            .map(|inner| PyResidueSet { inner })
            .map_err(to_py)
    }
}

fn any_set_to_py(py: Python<'_>, set: &AnySet) -> PyResult<Py<PyAny>> {
    Ok(match set {
        AnySet::Integers(s) => Py::new(py, PyIntegerSet { inner: s.clone() })?.into_any(),
        AnySet::Residues(s) => Py::new(py, PyResidueSet { inner: s.clone() })?.into_any(),
    })
}

fn py_to_any_set(obj: &Bound<'_, PyAny>) -> PyResult<AnySet> {
    if let Ok(s) = obj.cast::<PyResidueSet>() {
        return Ok(AnySet::Residues(s.get().inner.clone()));
    }
    if let Ok(s) = obj.cast::<PyIntegerSet>() {
        return Ok(AnySet::Integers(s.get().inner.clone()));
    }
    Err(PyValueError::new_err("expected a ResidueSet or an IntegerSet"))
}

/// Breakdown of `T₃` into trivial and combinatorial progressions.
#[pyfunction]
fn count_report<'py>(py: Python<'py>, set: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyDict>> {
    let r = match py_to_any_set(set)? {
        AnySet::Integers(s) => count::t3_integers(&s),
        AnySet::Residues(s) => count::count_report(&s),
    };
    let d = PyDict::new(py);
    d.set_item("t3", r.t3)?;
    d.set_item("trivial", r.trivial)?;
    d.set_item("combinatorial", r.combinatorial)?;
    Ok(d)
}

/// `#{(x, d) : x ∈ A₁, x + d ∈ A₂, x + 2d ∈ A₃}` via exact convolution.
#[pyfunction]
fn t3_fast(a1: &PyResidueSet, a2: &PyResidueSet, a3: &PyResidueSet) -> PyResult<u64> {
    count::t3_fast(&a1.inner, &a2.inner, &a3.inner).map_err(to_py)
}

/// The same count straight from the definition.
#[pyfunction]
fn t3_naive(a1: &PyResidueSet, a2: &PyResidueSet, a3: &PyResidueSet) -> PyResult<u64> {
    count::t3_naive(&a1.inner, &a2.inner, &a3.inner).map_err(to_py)
}

/// `E(k,m)` or `F(k,m)` as an integer set.
#[pyfunction]
fn generate_family(family: &str, k: u64, m: u64) -> PyResult<PyIntegerSet> {
    let family = match family {
        "E" | "e" => Family::E,
        "F" | "f" => Family::F,
        _ => return Err(PyValueError::new_err(format!("family must be 'E' or 'F', got {family:?}"))),
    };
    let tag = FamilyTag::new(family, k, m).map_err(to_py)?;
    construct::generate_family(tag)
        .map(|inner| PyIntegerSet { inner })
        .map_err(to_py)
}

/// Complement of `E(k,m)` in Z/NZ for prime N.
#[pyfunction]
fn wraparound_complement(modulus: u64, k: u64, m: u64) -> PyResult<PyResidueSet> {
    construct::wraparound_complement(modulus, k, m)
        .map(|w| PyResidueSet { inner: w.set })
        .map_err(to_py)
}

/// Best E/F split of size n mod N: `(tag, family_set, t3, complement_t3)`.
#[pyfunction]
fn optimize_wraparound(modulus: u64, n: u64) -> PyResult<(String, PyResidueSet, u64, u64)> {
    let o = construct::optimize_wraparound(modulus, n).map_err(to_py)?;
    Ok((o.tag.to_string(), PyResidueSet { inner: o.set }, o.t3, o.complement_t3))
}

/// Uniform n-subset of Z/NZ drawn from `seed`.
#[pyfunction]
fn random_set(n: u64, modulus: u64, seed: u64) -> PyResult<PyResidueSet> {
    construct::random_set(n, modulus, seed)
        .map(|inner| PyResidueSet { inner })
        .map_err(to_py)
}

/// Progression-poor `A ∩ (λB + μ)`: `(set, lambda, mu, feasible)`.
#[pyfunction]
#[pyo3(signature = (a, b, trials = 64, seed = 0, tolerance = 0.05))]
fn intersect_search(
    a: &PyResidueSet,
    b: &PyResidueSet,
    trials: usize,
    seed: u64,
    tolerance: f64,
) -> PyResult<(PyResidueSet, u64, u64, bool)> {
    let o = construct::intersect_search(&a.inner, &b.inner, IntersectConfig { trials, seed, tolerance })
        .map_err(to_py)?;
    Ok((PyResidueSet { inner: o.set }, o.lambda, o.mu, o.feasible))
}

/// Outcome of an exhaustive extremal search.
#[pyclass(name = "ExtremalResult", module = "threeap", frozen, get_all)]
pub struct PyExtremalResult {
    side: String,
    n: u64,
    modulus: Option<u64>,
    value: u64,
    witnesses: Vec<Py<PyAny>>,
    search_space_size: u64,
    pruned_count: u64,
}

#[pymethods]
impl PyExtremalResult {
    fn __repr__(&self) -> String {
        format!(
            "ExtremalResult(side={:?}, n={}, modulus={:?}, value={}, witnesses={})",
            self.side,
            self.n,
            self.modulus,
            self.value,
            self.witnesses.len()
        )
    }
}

fn extremal_to_py(py: Python<'_>, r: ExtremalResult) -> PyResult<PyExtremalResult> {
    Ok(PyExtremalResult {
        side: format!("{:?}", r.side).to_lowercase(),
        n: r.n,
        modulus: r.modulus,
        value: r.value,
        witnesses: r.witnesses.iter().map(|w| any_set_to_py(py, w)).collect::<PyResult<_>>()?,
        search_space_size: r.search_space_size,
        pruned_count: r.pruned_count,
    })
}

/// Exact `M₃(n)` over subsets of `{0,…,W}` (W defaults to 2n).
#[pyfunction]
#[pyo3(signature = (n, width_cap = None, budget_nodes = DEFAULT_BUDGET_NODES))]
fn max3ap_integers(py: Python<'_>, n: u64, width_cap: Option<u64>, budget_nodes: u64) -> PyResult<PyExtremalResult> {
    let r = py
        .detach(|| search::max3ap_integers(n, width_cap.unwrap_or(2 * n), budget_nodes))
        .map_err(to_py)?;
    extremal_to_py(py, r)
}

/// Exact `M₃(n,N)` (side "max") or `m₃(n,N)` (side "min") for prime N.
#[pyfunction]
#[pyo3(signature = (n, modulus, side = "max", budget_nodes = DEFAULT_BUDGET_NODES, via_complement = false))]
fn extremal_mod(
    py: Python<'_>,
    n: u64,
    modulus: u64,
    side: &str,
    budget_nodes: u64,
    via_complement: bool,
) -> PyResult<PyExtremalResult> {
    let side = parse_side(side)?;
    let r = py
        .detach(|| {
            if via_complement {
                search::extremal_mod_via_complement(n, modulus, side, budget_nodes)
            } else {
                search::extremal_mod(n, modulus, side, budget_nodes)
            }
        })
        .map_err(to_py)?;
    extremal_to_py(py, r)
}

/// `(family tag, scale, shift)` when the set is an affine image of an E/F
/// family, otherwise `None`.
#[pyfunction]
fn classify(set: &Bound<'_, PyAny>) -> PyResult<Option<(String, i64, i64)>> {
    let c = search::classify_extremal(&py_to_any_set(set)?).map_err(to_py)?;
    Ok(match (c.tag, c.map) {
        (Some(tag), Some(map)) if c.matched => Some((tag.to_string(), map.scale(), map.shift())),
        _ => None,
    })
}

/// `(dilator, offset, arc_length, covered)` for the shortest arc holding
/// `coverage·|A|` points of some dilate.
#[pyfunction]
#[pyo3(signature = (set, coverage = 1.0))]
fn rectify(py: Python<'_>, set: &PyResidueSet, coverage: f64) -> PyResult<(u64, u64, u64, u64)> {
    let r = py.detach(|| analysis::rectify(&set.inner, coverage)).map_err(to_py)?;
    Ok((r.dilator, r.offset, r.arc_length, r.covered))
}

/// Runs a named verification suite; returns `(passed, rows)` with rows
/// `(case, lhs, rhs, holds)`.
#[pyfunction]
#[pyo3(signature = (name, seed = 0, cases = None, modulus = None, n_max = None, budget_nodes = DEFAULT_BUDGET_NODES))]
#[allow(clippy::type_complexity)]
fn run_suite(
    py: Python<'_>,
    name: &str,
    seed: u64,
    cases: Option<usize>,
    modulus: Option<u64>,
    n_max: Option<u64>,
    budget_nodes: u64,
) -> PyResult<(bool, Vec<(String, String, String, bool)>)> {
    let suite: suites::Suite = name.parse().map_err(to_py)?;
    let cfg = SuiteConfig { seed, cases, modulus, n_max, budget_nodes };
    let report = py.detach(|| suites::run_suite(suite, &cfg)).map_err(to_py)?;
    let passed = report.passed();
    let rows = report.cases.into_iter().map(|c| (c.case, c.lhs, c.rhs, c.holds)).collect();
    Ok((passed, rows))
}

/// The density `2(7+2√6)/75` truncated to `digits` decimals.
#[pyfunction]
#[pyo3(signature = (digits = 12))]
fn cutoff(digits: u32) -> PyResult<String> {
    bounds::ef_sharpness_cutoff()
        .map_err(to_py)?
        .decimal(digits)
        .ok_or_else(|| PyValueError::new_err(format!("bracket not tight to {digits} digits")))
}

/// Exact bounds on `m₃` and `M₃` over a rational density grid.
#[pyclass(name = "Ledger", module = "threeap")]
pub struct PyLedger {
    inner: bounds::Ledger,
}

#[pymethods]
impl PyLedger {
    /// Grid `k/q`, products and complements, seeded with closed forms.
    #[staticmethod]
    #[pyo3(signature = (q = 96))]
    fn build(q: u64) -> PyResult<Self> {
        bounds::Ledger::build(q).map(|inner| PyLedger { inner }).map_err(to_py)
    }

    /// A ledger on the given densities (strings such as "1/4") with no records.
    #[staticmethod]
    fn with_grid(alphas: Vec<String>) -> PyResult<Self> {
        let grid = alphas.iter().map(|a| parse_rational(a)).collect::<Result<Vec<_>, _>>().map_err(to_py)?;
        bounds::Ledger::with_grid(grid).map(|inner| PyLedger { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        bounds::Ledger::from_json(text).map(|inner| PyLedger { inner }).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.records().len()
    }

    /// Adds a closed-form record, e.g. `("m3", "1/2", "upper", "5/48", "wraparound")`.
    fn insert(&mut self, target: &str, alpha: &str, side: &str, value: &str, name: &str) -> PyResult<usize> {
        let side = match side {
            "upper" => bounds::BoundSide::Upper,
            "lower" => bounds::BoundSide::Lower,
            "exact" => bounds::BoundSide::Exact,
            _ => return Err(PyValueError::new_err(format!("unknown side {side:?}"))),
        };
        let record = bounds::BoundRecord::closed_form(
            parse_target(target)?,
            parse_rational(alpha).map_err(to_py)?,
            side,
            parse_rational(value).map_err(to_py)?,
            name,
        );
        self.inner.insert(record).map_err(to_py)
    }

    /// Runs the closure; returns `(passes, added, converged)`.
    #[pyo3(signature = (iterations = 100, admit_finite = false))]
    fn closure(&mut self, py: Python<'_>, iterations: usize, admit_finite: bool) -> PyResult<(usize, usize, bool)> {
        let inner = &mut self.inner;
        let s = py.detach(|| inner.closure(iterations, admit_finite)).map_err(to_py)?;
        Ok((s.passes, s.added, s.converged))
    }

    /// Best upper bound as `"p/q"`, or `None`.
    fn best_upper(&self, target: &str, alpha: &str) -> PyResult<Option<String>> {
        let a = parse_rational(alpha).map_err(to_py)?;
        Ok(self.inner.best_upper(parse_target(target)?, &a).map(|r| format_rational(&r.value)))
    }

    /// Best lower bound as `"p/q"`, or `None`.
    fn best_lower(&self, target: &str, alpha: &str) -> PyResult<Option<String>> {
        let a = parse_rational(alpha).map_err(to_py)?;
        Ok(self.inner.best_lower(parse_target(target)?, &a).map(|r| format_rational(&r.value)))
    }

    fn is_consistent(&self) -> bool {
        self.inner.is_consistent()
    }
}

#[pymodule]
pub fn threeap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyResidueSet>()?;
    m.add_class::<PyIntegerSet>()?;
    m.add_class::<PyExtremalResult>()?;
    m.add_class::<PyLedger>()?;
    m.add("BudgetExceededError", m.py().get_type::<BudgetExceededError>())?;
    m.add_function(wrap_pyfunction!(count_report, m)?)?;
    m.add_function(wrap_pyfunction!(t3_fast, m)?)?;
    m.add_function(wrap_pyfunction!(t3_naive, m)?)?;
    m.add_function(wrap_pyfunction!(generate_family, m)?)?;
    m.add_function(wrap_pyfunction!(wraparound_complement, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_wraparound, m)?)?;
    m.add_function(wrap_pyfunction!(random_set, m)?)?;
    m.add_function(wrap_pyfunction!(intersect_search, m)?)?;
    m.add_function(wrap_pyfunction!(max3ap_integers, m)?)?;
    m.add_function(wrap_pyfunction!(extremal_mod, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(rectify, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(cutoff, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
