//! Python bindings. Structured results come back as plain dicts and lists.

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::Value;

use superlie::cohomology::{h_sdim, BlockMode, Options};
use superlie::coeff::Q;
use superlie::deform::{deform_bracket, quantization_tower};
use superlie::families::{self as fam, FamilyError, Size};
use superlie::liesuper::{io, iso, SuperLieAlgebra};
use superlie::splitness::{self, SplitOutcome, Term};
use superlie::suites::{self, SuiteError, SuiteOptions};

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn runtime<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A finite-dimensional Lie superalgebra with an explicit bracket table.
#[pyclass(name = "Algebra", module = "superlie_py", frozen)]
struct PyAlgebra {
    inner: SuperLieAlgebra,
}

#[pymethods]
impl PyAlgebra {
    /// Builds a named family member, e.g. `Algebra("svect", "3")`.
    #[new]
    #[pyo3(signature = (family, n=None, param=None))]
    fn new(family: &str, n: Option<&str>, param: Option<&str>) -> PyResult<Self> {
        let size = n.map(Size::parse).transpose().map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = fam::build(family, size, param).map_err(|e| match e {
            FamilyError::Unknown(_) => PyKeyError::new_err(e.to_string()),
            FamilyError::Missing { .. } | FamilyError::Size(_) => PyValueError::new_err(e.to_string()),
            other => runtime(other),
        })?;
        Ok(PyAlgebra { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    /// (even, odd) dimensions.
    #[getter]
    fn sdim(&self) -> (usize, usize) {
        let s = self.inner.sdim();
        (s.even, s.odd)
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels()
    }

    fn __len__(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        let s = self.inner.sdim();
        format!("Algebra({}, sdim {}|{})", self.inner.name, s.even, s.odd)
    }

    /// The full algebra as a dict (basis and nonzero brackets).
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &io::to_json(&self.inner))
    }

    fn check_axioms(&self) -> bool {
        self.inner.check_axioms().ok()
    }

    fn is_simple(&self) -> PyResult<bool> {
        Ok(self.inner.is_simple().map_err(runtime)?.simple)
    }

    /// H^k with adjoint coefficients as (even, odd); k is 0, 1 or 2.
    #[pyo3(signature = (k=2, mode="inner-invariant"))]
    fn cohomology(&self, k: usize, mode: &str) -> PyResult<(usize, usize)> {
        let mode = match mode {
            "inner-invariant" => BlockMode::InnerInvariant,
            "full" => BlockMode::Full,
            "monolithic" => BlockMode::Monolithic,
            other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
        };
        let r = h_sdim(&self.inner, k, &Options { mode, ..Options::default() }).map_err(runtime)?;
        Ok((r.sdim.even, r.sdim.odd))
    }

    /// H^2 representatives as rendered cochains.
    fn h2_representatives(&self) -> PyResult<Vec<String>> {
        let r = h_sdim(&self.inner, 2, &Options::default()).map_err(runtime)?;
        Ok(r.representatives.iter().map(|c| c.render(&self.inner)).collect())
    }

    /// Deforms by the i-th H^2 representative with parameter `param`
    /// (odd classes need an odd name, the ring is chosen from the class).
    #[pyo3(signature = (param, index=0))]
    fn deform(&self, param: &str, index: usize) -> PyResult<PyAlgebra> {
        let r = h_sdim(&self.inner, 2, &Options::default()).map_err(runtime)?;
        let c = r.representatives.get(index).ok_or_else(|| PyValueError::new_err(format!("H^2 has {} representatives", r.representatives.len())))?;
        let d = deform_bracket(&self.inner, c, param).map_err(runtime)?;
        Ok(PyAlgebra { inner: d.algebra })
    }

    /// True if an isomorphism is found and verified within the node budget.
    #[pyo3(signature = (other, budget=500_000))]
    fn is_isomorphic(&self, other: &PyAlgebra, budget: usize) -> PyResult<bool> {
        if self.inner.sdim() != other.inner.sdim() {
            return Ok(false);
        }
        let o = iso::find_isomorphism(&self.inner, &other.inner, budget).map_err(runtime)?;
        Ok(o.found && o.map.as_ref().is_some_and(|m| iso::verify(&self.inner, &other.inner, m)))
    }
}

/// Names accepted by `Algebra(family, ...)`.
#[pyfunction]
fn families() -> Vec<&'static str> {
    fam::FAMILIES.to_vec()
}

/// Tries to split the superstring of type k perturbed by the given terms,
/// e.g. `split(-4, ["tau:x^-1"])`. Returns (is_split, description).
#[pyfunction]
fn split(k: i64, terms: Vec<String>) -> PyResult<(bool, String)> {
    let terms: Vec<Term> = terms.iter().map(|t| Term::parse(t)).collect::<Result<_, _>>().map_err(|e| PyValueError::new_err(e.to_string()))?;
    let t = splitness::make_superstring(k, &terms).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let r = splitness::splitting_attempt(&t).map_err(runtime)?;
    let ok = matches!(&r.outcome, SplitOutcome::Split(w) if splitness::verify_witness(&t, w));
    Ok((ok, r.to_string()))
}

/// (h0, h1) of O(a) on the projective line, computed by Cech cohomology.
#[pyfunction]
fn line_bundle(a: i64) -> (usize, usize) {
    let c = splitness::line_bundle_cohomology(a);
    (c.h0, c.h1)
}

/// sdims of the Clifford quotient tower at t = 1.
#[pyfunction]
fn clifford_tower(m: usize) -> PyResult<Vec<(String, (usize, usize))>> {
    let t = quantization_tower(m, &Q::from_integer(1.into())).map_err(runtime)?;
    Ok(t.nodes.into_iter().map(|n| (n.name, (n.sdim.even, n.sdim.odd))).collect())
}

/// Runs a verification suite and returns its report as a dict.
#[pyfunction]
#[pyo3(signature = (name, max_n=5))]
fn run_suite<'py>(py: Python<'py>, name: &str, max_n: usize) -> PyResult<Bound<'py, PyAny>> {
    let o = SuiteOptions { max_n, ..SuiteOptions::default() };
    let r = py.detach(|| suites::run_suite(name, &o)).map_err(|e| match e {
        SuiteError::Unknown(_) => PyKeyError::new_err(e.to_string()),
        other => runtime(other),
    })?;
    to_py(py, &serde_json::to_value(&r).map_err(runtime)?)
}

#[pymodule]
fn superlie_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlgebra>()?;
    m.add_function(wrap_pyfunction!(families, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(line_bundle, m)?)?;
    m.add_function(wrap_pyfunction!(clifford_tower, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_round_trip() {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "superlie_py").unwrap();
            superlie_py(&m).unwrap();
            let g = m.getattr("Algebra").unwrap().call1(("psq", "3")).unwrap();
            let sdim: (usize, usize) = g.getattr("sdim").unwrap().extract().unwrap();
            assert_eq!(sdim, (8, 8));
            let h: (usize, usize) = g.call_method1("cohomology", (2,)).unwrap().extract().unwrap();
            assert_eq!(h, (0, 0));
            let err = m.getattr("Algebra").unwrap().call1(("psq", "x")).unwrap_err();
            assert!(err.is_instance_of::<PyValueError>(py));
        });
    }
}
